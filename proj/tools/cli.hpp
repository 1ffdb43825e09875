#pragma once

#include <ostream>

namespace condbohm::cli {

/// Entry point of the command-line tool with injectable streams. Returns the
/// process exit status: 0 on success, the error kind's code otherwise.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace condbohm::cli
