#pragma once

#include <stdexcept>
#include <string>

namespace condbohm {

/// Error categories. Each maps to a distinct CLI exit code.
enum class ErrorKind {
  config = 2,
  validation = 3,
  node_proximity = 4,
  out_of_domain = 5,
  convergence = 6,
  io = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

}  // namespace condbohm
