#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace brownne {

using Cell = std::variant<double, long long, std::string>;

struct Provenance {
  std::uint64_t seed = 0;
  std::string build_id;
  std::string timestamp;  ///< ISO-8601 UTC; the only field allowed to differ between reruns
};

/// Rectangular table with unique column names.
class ReportTable {
 public:
  explicit ReportTable(std::vector<std::string> columns);

  void add_row(std::vector<Cell> row);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  std::size_t column_index(const std::string& name) const;
  /// Values of a numeric column; throws ContractError on text cells.
  std::vector<double> numeric_column(const std::string& name) const;

  Provenance provenance;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_cell(const Cell& cell);

/// CSV text: header row, RFC-4180 quoting, LF endings, provenance as trailing
/// '#' comment lines.
std::string to_csv(const ReportTable& table);
void emit_csv(const ReportTable& table, const std::string& path);

/// Line chart of y_cols against x_col. With log_y, nonpositive values are
/// clamped to the smallest positive value of their column and a warning is
/// returned for each clamped column.
std::vector<std::string> emit_svg(const ReportTable& table, const std::string& x_col,
                                  const std::vector<std::string>& y_cols, const std::string& path,
                                  bool log_y);

std::string build_id();
std::string utc_timestamp();

}  // namespace brownne
