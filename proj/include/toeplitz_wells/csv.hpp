#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace toeplitz_wells {

/// Shortest decimal text that round-trips to the same double; "nan",
/// "inf" and "-inf" for non-finite values.
std::string csv_number(double value);

/// RFC 4180 field quoting: fields containing a comma, quote, CR or LF are
/// wrapped in double quotes with embedded quotes doubled.
std::string csv_field(const std::string& text);

/// Minimal CSV table writer. Rows must have as many fields as the header.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& field(const std::string& text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  CsvWriter& field(std::size_t value) { return field(static_cast<long long>(value)); }
  CsvWriter& field(bool value) { return field(std::string(value ? "true" : "false")); }
  CsvWriter& field(const char* text) { return field(std::string(text)); }
  /// Terminates the current row (CRLF line ending per RFC 4180).
  void end_row();

 private:
  void put(const std::string& raw);

  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

}  // namespace toeplitz_wells
