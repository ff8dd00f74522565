#include "lakesketch/sketch.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "lakesketch/errors.hpp"

namespace lakesketch {

bool MinHashSignature::empty_set() const {
  return std::all_of(values.begin(), values.end(), [](auto v) { return v == kEmptySlot; });
}

MinHasher::MinHasher(std::size_t num_perm, HashFamily family) {
  if (num_perm == 0) throw InvalidArgument("num_perm must be positive");
  salts_.resize(num_perm);
  for (std::size_t i = 0; i < num_perm; ++i) {
    salts_[i] = splitmix64(family.seed ^ splitmix64(0xA5A5A5A5ULL + i));
  }
  signature_.family = family;
  signature_.values.assign(num_perm, kEmptySlot);
}

void MinHasher::add(std::string_view item) {
  const std::uint64_t base = signature_.family(item);
  auto* slots = signature_.values.data();
  const std::size_t n = salts_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t v = fmix64(base ^ salts_[i]);
    if (v < slots[i]) slots[i] = v;
  }
}

void MinHasher::reset() { std::fill(signature_.values.begin(), signature_.values.end(), kEmptySlot); }

MinHashSignature minhash(std::span<const std::string> items, std::size_t num_perm,
                         const HashFamily& family) {
  MinHasher hasher(num_perm, family);
  for (const auto& item : items) hasher.add(item);
  return hasher.signature();
}

MinHashSignature minhash(std::span<const std::string_view> items, std::size_t num_perm,
                         const HashFamily& family) {
  MinHasher hasher(num_perm, family);
  for (auto item : items) hasher.add(item);
  return hasher.signature();
}

double jaccard_estimate(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.num_perm() != b.num_perm()) {
    throw IncompatibleSketchError("signatures have different num_perm");
  }
  if (a.family != b.family) throw IncompatibleSketchError("signatures use different hash families");
  if (a.num_perm() == 0) throw IncompatibleSketchError("empty signature");
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) equal += a.values[i] == b.values[i];
  return static_cast<double>(equal) / static_cast<double>(a.num_perm());
}

double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

NumericalSketch numerical_sketch(const Column& column, std::size_t row_count) {
  NumericalSketch sketch{};
  std::unordered_set<std::string_view> distinct;
  std::size_t nulls = 0;
  std::size_t width_total = 0;
  std::size_t non_null = 0;
  std::vector<double> values;

  for (const auto& cell : column.cells) {
    if (is_null_cell(cell)) {
      ++nulls;
      continue;
    }
    ++non_null;
    distinct.insert(trim(cell));
    width_total += cell.size();
    if (is_numeric(column.type)) {
      if (auto v = numeric_value(cell, column.type)) values.push_back(*v);
    }
  }

  if (row_count > 0) {
    sketch[kUniqueCount] = static_cast<double>(distinct.size()) / static_cast<double>(row_count);
    sketch[kNanCount] = static_cast<double>(nulls) / static_cast<double>(row_count);
  }
  if (column.type == ColumnType::String) {
    if (non_null > 0) {
      sketch[kCellWidth] = static_cast<double>(width_total) / static_cast<double>(non_null);
    }
    return sketch;
  }
  if (values.empty()) return sketch;

  // Every statistic is computed from the sorted values so the result does
  // not depend on row order.
  std::sort(values.begin(), values.end());
  for (std::size_t p = 0; p < 9; ++p) {
    sketch[kP10 + p] = percentile_sorted(values, static_cast<double>(p + 1) / 10.0);
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  sketch[kMean] = mean;
  sketch[kStd] = std::sqrt(ss / n);
  sketch[kMin] = values.front();
  sketch[kMax] = values.back();
  return sketch;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : text) {
    if (std::isalnum(ch) || ch >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> cell_set(const Column& column) {
  std::vector<std::string> out;
  out.reserve(column.cells.size());
  for (const auto& cell : column.cells) {
    if (!is_null_cell(cell)) out.push_back(to_lower(trim(cell)));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string row_string(const Table& table, std::size_t row) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out.push_back(' ');
    out.append(trim(table.columns[c].cells[row]));
  }
  return out;
}

MinHashSignature content_snapshot(const Table& table, std::size_t num_perm,
                                  const HashFamily& family, std::size_t max_rows) {
  MinHasher hasher(num_perm, family);
  const auto rows = std::min(table.row_count, max_rows);
  for (std::size_t r = 0; r < rows; ++r) hasher.add(row_string(table, r));
  return hasher.signature();
}

ColumnSketch sketch_column(const Column& column, std::size_t row_count, const SketchConfig& config) {
  ColumnSketch sketch;
  sketch.type = column.type;
  sketch.cells = minhash(std::span<const std::string>(cell_set(column)), config.num_perm, config.family);
  if (column.type == ColumnType::String) {
    MinHasher words(config.num_perm, config.family);
    for (const auto& cell : column.cells) {
      if (is_null_cell(cell)) continue;
      for (const auto& w : word_tokens(cell)) words.add(w);
    }
    sketch.words = words.signature();
  }
  sketch.numerical = numerical_sketch(column, row_count);
  return sketch;
}

TableSketch sketch_table(const Table& table, const SketchConfig& config) {
  TableSketch sketch;
  sketch.table_id = table.id;
  sketch.description = table.description;
  sketch.column_names = table.column_names();
  sketch.content_snapshot =
      content_snapshot(table, config.num_perm, config.family, config.snapshot_rows);
  sketch.columns.reserve(table.columns.size());
  for (const auto& column : table.columns) {
    sketch.columns.push_back(sketch_column(column, table.row_count, config));
  }
  return sketch;
}

}  // namespace lakesketch
