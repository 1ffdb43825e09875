#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace condbohm {

/// Shortest round-trip decimal form ('.' separator, locale independent).
std::string format_double(double v);

/// Comma-separated rows with a header; fields containing separators are quoted.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header);
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);

  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(std::string_view s);
  void end_row();

 private:
  void separator();

  std::ostream& os_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

}  // namespace condbohm
