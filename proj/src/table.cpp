#include "lakesketch/table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include "lakesketch/errors.hpp"

namespace lakesketch {

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::String: return "string";
    case ColumnType::Integer: return "integer";
    case ColumnType::Float: return "float";
    case ColumnType::Date: return "date";
  }
  return "string";
}

ColumnType column_type_from_string(std::string_view name) {
  if (name == "string") return ColumnType::String;
  if (name == "integer") return ColumnType::Integer;
  if (name == "float") return ColumnType::Float;
  if (name == "date") return ColumnType::Date;
  throw FormatError("unknown column type: " + std::string(name));
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

std::vector<std::string> Table::row(std::size_t r) const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.cells.at(r));
  return out;
}

void Table::validate() const {
  for (const auto& c : columns) {
    if (c.cells.size() != row_count) {
      throw ShapeError("column '" + c.name + "' of table '" + id + "' has " +
                       std::to_string(c.cells.size()) + " cells, expected " +
                       std::to_string(row_count));
    }
  }
}

std::string_view trim(std::string_view text) {
  auto is_space = [](unsigned char ch) { return std::isspace(ch) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

bool is_null_cell(std::string_view cell) {
  const auto t = trim(cell);
  if (t.empty()) return true;
  if (t.size() > 4) return false;
  const auto lower = to_lower(t);
  return lower == "nan" || lower == "null" || lower == "na";
}

std::optional<std::int64_t> parse_integer(std::string_view cell) {
  const auto t = trim(cell);
  if (t.empty()) return std::nullopt;
  const auto digits = t.front() == '-' ? t.substr(1) : t;
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(),
                                     [](unsigned char ch) { return std::isdigit(ch) != 0; })) {
    return std::nullopt;
  }
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_float(std::string_view cell) {
  const auto t = trim(cell);
  if (t.empty() || t.front() == '+') return std::nullopt;
  // from_chars also accepts inf/nan spellings; those are not numbers here.
  const bool has_digit = std::any_of(t.begin(), t.end(),
                                     [](unsigned char ch) { return std::isdigit(ch) != 0; });
  if (!has_digit) return std::nullopt;
  for (unsigned char ch : t) {
    if (!(std::isdigit(ch) || ch == '-' || ch == '.' || ch == 'e' || ch == 'E' || ch == '+')) {
      return std::nullopt;
    }
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

namespace {

std::optional<int> parse_fixed_digits(std::string_view text) {
  if (text.empty()) return std::nullopt;
  int value = 0;
  for (unsigned char ch : text) {
    if (!std::isdigit(ch)) return std::nullopt;
    value = value * 10 + (ch - '0');
  }
  return value;
}

std::optional<std::int64_t> civil_to_epoch(int y, int m, int d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count();
}

}  // namespace

std::optional<std::int64_t> date_to_timestamp(std::string_view cell) {
  const auto t = trim(cell);
  // YYYY-MM-DD and YYYY-MM-DDTHH:MM:SS
  if ((t.size() == 10 || t.size() == 19) && t[4] == '-' && t[7] == '-') {
    auto y = parse_fixed_digits(t.substr(0, 4));
    auto m = parse_fixed_digits(t.substr(5, 2));
    auto d = parse_fixed_digits(t.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    auto base = civil_to_epoch(*y, *m, *d);
    if (!base) return std::nullopt;
    if (t.size() == 10) return base;
    if (t[10] != 'T' || t[13] != ':' || t[16] != ':') return std::nullopt;
    auto hh = parse_fixed_digits(t.substr(11, 2));
    auto mm = parse_fixed_digits(t.substr(14, 2));
    auto ss = parse_fixed_digits(t.substr(17, 2));
    if (!hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss > 59) return std::nullopt;
    return *base + *hh * 3600 + *mm * 60 + *ss;
  }
  // DD/MM/YY and DD/MM/YYYY
  if ((t.size() == 8 || t.size() == 10) && t[2] == '/' && t[5] == '/') {
    auto d = parse_fixed_digits(t.substr(0, 2));
    auto m = parse_fixed_digits(t.substr(3, 2));
    auto y = parse_fixed_digits(t.substr(6));
    if (!d || !m || !y) return std::nullopt;
    int year = *y;
    if (t.size() == 8) year += year < 70 ? 2000 : 1900;
    return civil_to_epoch(year, *m, *d);
  }
  return std::nullopt;
}

ColumnType infer_column_type(std::span<const std::string> cells) {
  std::vector<std::string_view> sample;
  for (const auto& cell : cells) {
    if (sample.size() == kTypeInferenceSample) break;
    if (!is_null_cell(cell)) sample.push_back(cell);
  }
  if (sample.empty()) return ColumnType::String;
  auto all = [&](auto&& pred) { return std::all_of(sample.begin(), sample.end(), pred); };
  if (all([](std::string_view c) { return parse_integer(c).has_value(); })) {
    return ColumnType::Integer;
  }
  if (all([](std::string_view c) { return parse_float(c).has_value(); })) {
    return ColumnType::Float;
  }
  if (all([](std::string_view c) { return date_to_timestamp(c).has_value(); })) {
    return ColumnType::Date;
  }
  return ColumnType::String;
}

std::optional<double> numeric_value(std::string_view cell, ColumnType type) {
  switch (type) {
    case ColumnType::Integer:
    case ColumnType::Float:
      return parse_float(cell);
    case ColumnType::Date:
      if (auto ts = date_to_timestamp(cell)) return static_cast<double>(*ts);
      return std::nullopt;
    case ColumnType::String:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::vector<std::string>> read_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool record_has_content = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = !record_has_content && record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
    record_has_content = false;
  };

  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        field_quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        record_has_content = true;
        break;
    }
  }
  if (!field.empty() || field_quoted || !record.empty() || record_has_content) end_record();
  return records;
}

Table make_table(std::string id, std::vector<std::string> names,
                 const std::vector<std::vector<std::string>>& rows, std::string description) {
  Table table;
  table.id = std::move(id);
  table.description = std::move(description);
  table.row_count = rows.size();
  table.columns.resize(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) {
    table.columns[c].name = std::move(names[c]);
    table.columns[c].cells.reserve(rows.size());
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      table.columns[c].cells.push_back(c < row.size() ? row[c] : std::string{});
    }
  }
  for (auto& column : table.columns) column.type = infer_column_type(column.cells);
  table.validate();
  return table;
}

Table parse_csv_text(std::string_view text, std::string id, const CsvOptions& options) {
  auto records = read_csv_records(text);
  std::size_t width = 0;
  for (const auto& r : records) width = std::max(width, r.size());
  if (width == 0) throw ZeroColumnsError("table '" + id + "' has no columns");

  std::vector<std::string> names;
  std::size_t first_row = 0;
  if (options.has_header) {
    names = records.front();
    first_row = 1;
  }
  for (std::size_t c = names.size(); c < width; ++c) names.push_back("col_" + std::to_string(c));

  std::vector<std::vector<std::string>> rows(records.begin() + static_cast<std::ptrdiff_t>(first_row),
                                             records.end());
  return make_table(std::move(id), std::move(names), rows, options.description.value_or(""));
}

Table parse_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());

  CsvOptions resolved = options;
  if (!resolved.description) {
    auto sidecar = path;
    sidecar.replace_extension(".desc.txt");
    if (std::filesystem::exists(sidecar)) {
      std::ifstream desc(sidecar, std::ios::binary);
      std::ostringstream text;
      text << desc.rdbuf();
      resolved.description = std::string(trim(text.str()));
    }
  }
  return parse_csv_text(buffer.str(), path.stem().string(), resolved);
}

namespace {

void append_field(std::string& out, std::string_view field, bool force_quotes) {
  const bool needs_quotes = force_quotes || field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  // A single empty field would be read back as a blank line and dropped.
  const bool lone_column = table.columns.size() == 1;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out.push_back(',');
    append_field(out, table.columns[c].name, lone_column && table.columns[c].name.empty());
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < table.row_count; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out.push_back(',');
      const auto& cell = table.columns[c].cells[r];
      append_field(out, cell, lone_column && cell.empty());
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_csv(table);
  if (!out) throw IoError("failed writing " + path.string());
}

Table select_rows(const Table& table, std::span<const std::size_t> rows, std::string id) {
  Table out;
  out.id = std::move(id);
  out.description = table.description;
  out.row_count = rows.size();
  out.columns.reserve(table.columns.size());
  for (const auto& column : table.columns) {
    Column c{column.name, column.type, {}};
    c.cells.reserve(rows.size());
    for (auto r : rows) c.cells.push_back(column.cells.at(r));
    out.columns.push_back(std::move(c));
  }
  return out;
}

Table select_columns(const Table& table, std::span<const std::size_t> columns, std::string id) {
  Table out;
  out.id = std::move(id);
  out.description = table.description;
  out.row_count = table.row_count;
  out.columns.reserve(columns.size());
  for (auto c : columns) out.columns.push_back(table.columns.at(c));
  return out;
}

}  // namespace lakesketch
