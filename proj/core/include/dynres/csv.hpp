#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <vector>

namespace dynres {

/// Minimal RFC-4180 writer: CRLF line ends, '.' decimal point, doubles with
/// 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  /// Row of preformatted cells (quoted when needed).
  void text_row(const std::vector<std::string>& cells);

  std::size_t columns() const { return columns_; }

 private:
  std::ostream& os_;
  std::size_t columns_;
};

std::string format_double(double x);

}  // namespace dynres
