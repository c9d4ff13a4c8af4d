#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gnnlab {

/// Header plus string cells. No quoting; cells are trimmed of whitespace.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  /// Like column() but throws FormatError naming the missing column.
  std::size_t require_column(std::string_view name) const;
  /// Parses rows[row][col]; throws FormatError with the 1-based data row index.
  double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

}  // namespace gnnlab
