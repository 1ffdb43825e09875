#include "condbohm/io.hpp"

#include <charconv>
#include <cmath>

#include "condbohm/error.hpp"

namespace condbohm {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header)
    : os_(os), columns_(header.size()) {
  for (auto h : header) field(h);
  end_row();
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), columns_(header.size()) {
  for (const auto& h : header) field(std::string_view(h));
  end_row();
}

void CsvWriter::separator() {
  if (in_row_ > 0) os_ << ',';
  ++in_row_;
}

CsvWriter& CsvWriter::field(double v) {
  separator();
  os_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::field(long long v) {
  separator();
  os_ << v;
  return *this;
}

CsvWriter& CsvWriter::field(std::string_view s) {
  separator();
  if (s.find_first_of(",\"\n") == std::string_view::npos) {
    os_ << s;
    return *this;
  }
  os_ << '"';
  for (char c : s) {
    if (c == '"') os_ << '"';
    os_ << c;
  }
  os_ << '"';
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw Error(ErrorKind::io, "csv row has the wrong number of fields");
  os_ << '\n';
  in_row_ = 0;
}

}  // namespace condbohm
