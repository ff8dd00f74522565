#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lakesketch/hashing.hpp"
#include "lakesketch/table.hpp"

namespace lakesketch {

inline constexpr std::uint64_t kEmptySlot = std::numeric_limits<std::uint64_t>::max();

struct MinHashSignature {
  std::vector<std::uint64_t> values;
  HashFamily family;

  std::size_t num_perm() const { return values.size(); }
  bool empty_set() const;

  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;
};

/// Incremental MinHash over a set of byte strings.
///
/// Slot i holds min over items of mix(h(item) ^ salt_i), where h is the
/// seeded family hash and salt_i is derived from (seed, i). Duplicate items
/// do not change the signature.
class MinHasher {
 public:
  MinHasher(std::size_t num_perm, HashFamily family);

  void add(std::string_view item);
  void reset();
  const MinHashSignature& signature() const { return signature_; }

 private:
  std::vector<std::uint64_t> salts_;
  MinHashSignature signature_;
};

MinHashSignature minhash(std::span<const std::string> items, std::size_t num_perm,
                         const HashFamily& family);
MinHashSignature minhash(std::span<const std::string_view> items, std::size_t num_perm,
                         const HashFamily& family);

/// Fraction of equal slots. Throws IncompatibleSketchError when the
/// signatures differ in length or family.
double jaccard_estimate(const MinHashSignature& a, const MinHashSignature& b);

/// Slot layout of the numerical sketch.
enum NumericalSlot : std::size_t {
  kUniqueCount = 0,
  kNanCount = 1,
  kCellWidth = 2,
  kP10 = 3,  // p10..p90 occupy slots 3..11
  kMean = 12,
  kStd = 13,
  kMin = 14,
  kMax = 15,
};
inline constexpr std::size_t kNumericalSketchSize = 16;

using NumericalSketch = std::array<double, kNumericalSketchSize>;

/// Linear interpolation between closest ranks over sorted values.
double percentile_sorted(std::span<const double> sorted, double q);

NumericalSketch numerical_sketch(const Column& column, std::size_t row_count);

struct ColumnSketch {
  MinHashSignature cells;
  std::optional<MinHashSignature> words;  // String columns only
  NumericalSketch numerical{};
  ColumnType type = ColumnType::String;

  friend bool operator==(const ColumnSketch&, const ColumnSketch&) = default;
};

struct TableSketch {
  std::string table_id;
  std::string description;
  std::vector<std::string> column_names;
  MinHashSignature content_snapshot;
  std::vector<ColumnSketch> columns;

  friend bool operator==(const TableSketch&, const TableSketch&) = default;
};

struct SketchConfig {
  std::size_t num_perm = 256;
  HashFamily family{};
  std::size_t snapshot_rows = 10000;
};

/// Lowercase alphanumeric runs. Bytes >= 0x80 count as alphanumeric so UTF-8
/// words stay intact.
std::vector<std::string> word_tokens(std::string_view text);

/// Lowercased, trimmed, non-null cell values of a column.
std::vector<std::string> cell_set(const Column& column);

/// Rendering of a row for the content snapshot: cells joined by one space.
std::string row_string(const Table& table, std::size_t row);

MinHashSignature content_snapshot(const Table& table, std::size_t num_perm,
                                  const HashFamily& family, std::size_t max_rows = 10000);

ColumnSketch sketch_column(const Column& column, std::size_t row_count, const SketchConfig& config);
TableSketch sketch_table(const Table& table, const SketchConfig& config = {});

}  // namespace lakesketch
