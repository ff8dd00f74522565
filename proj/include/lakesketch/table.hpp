#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lakesketch {

/// Column data type. The integer codes are part of the model input and must
/// never change.
enum class ColumnType : int {
  String = 1,
  Integer = 2,
  Float = 3,
  Date = 4,
};

std::string_view to_string(ColumnType type);
ColumnType column_type_from_string(std::string_view name);

inline bool is_numeric(ColumnType type) { return type != ColumnType::String; }

struct Column {
  std::string name;
  ColumnType type = ColumnType::String;
  std::vector<std::string> cells;
};

struct Table {
  std::string id;
  std::string description;
  std::vector<Column> columns;
  std::size_t row_count = 0;

  std::size_t column_count() const { return columns.size(); }
  std::vector<std::string> column_names() const;
  std::vector<std::string> row(std::size_t r) const;

  /// Throws ShapeError when a column's cell count differs from row_count.
  void validate() const;
};

struct CsvOptions {
  bool has_header = true;
  /// Description text. When absent, `<stem>.desc.txt` next to the file is
  /// used if it exists.
  std::optional<std::string> description;
};

Table parse_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Parses CSV text. `id` becomes the table id.
Table parse_csv_text(std::string_view text, std::string id, const CsvOptions& options = {});

/// Splits CSV text into records. Empty lines are skipped.
std::vector<std::vector<std::string>> read_csv_records(std::string_view text);

std::string to_csv(const Table& table);
void write_csv(const Table& table, const std::filesystem::path& path);

/// Builds a table from rows (row-major), inferring each column type.
Table make_table(std::string id, std::vector<std::string> names,
                 const std::vector<std::vector<std::string>>& rows,
                 std::string description = {});

/// Returns a copy of `table` keeping the given rows, in the given order.
Table select_rows(const Table& table, std::span<const std::size_t> rows, std::string id);

/// Returns a copy of `table` keeping the given columns, in the given order.
Table select_columns(const Table& table, std::span<const std::size_t> columns, std::string id);

/// Number of cells inspected by type inference.
inline constexpr std::size_t kTypeInferenceSample = 10;

ColumnType infer_column_type(std::span<const std::string> cells);

/// Empty, or one of nan/null/na (case-insensitive, surrounding whitespace ignored).
bool is_null_cell(std::string_view cell);

std::optional<std::int64_t> parse_integer(std::string_view cell);
std::optional<double> parse_float(std::string_view cell);

/// Epoch seconds (UTC). Accepts YYYY-MM-DD, DD/MM/YY, DD/MM/YYYY and
/// YYYY-MM-DDTHH:MM:SS.
std::optional<std::int64_t> date_to_timestamp(std::string_view cell);

/// Numeric value of a cell under the given column type, or nullopt.
std::optional<double> numeric_value(std::string_view cell, ColumnType type);

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);

}  // namespace lakesketch
