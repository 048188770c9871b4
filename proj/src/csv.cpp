#include "toeplitz_wells/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace toeplitz_wells {

std::string csv_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::put(const std::string& raw) {
  if (filled_ == columns_) throw std::logic_error("CSV row has more fields than the header");
  if (filled_ > 0) out_ << ',';
  out_ << raw;
  ++filled_;
}

CsvWriter& CsvWriter::field(const std::string& text) {
  put(csv_field(text));
  return *this;
}

CsvWriter& CsvWriter::field(double value) {
  put(csv_number(value));
  return *this;
}

CsvWriter& CsvWriter::field(long long value) {
  put(std::to_string(value));
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("CSV row has fewer fields than the header");
  out_ << "\r\n";
  filled_ = 0;
}

}  // namespace toeplitz_wells
