#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lakesketch/encoder.hpp"
#include "lakesketch/eval.hpp"
#include "lakesketch/table.hpp"

namespace lakesketch {

/// A labeled pair of generated tables, by id.
struct GeneratedPair {
  std::string table_a;
  std::string table_b;
  std::string task;  // union-binary, join-binary, subset-binary, jaccard-regression, containment-regression
  nlohmann::json label;
};

// ---------------------------------------------------------------------------
// Quadrant joins

/// Minimum unique-value fraction of a join column.
inline constexpr double kJoinUniqueFraction = 0.8;
/// Row-cut shifts tried after the midpoint.
inline constexpr std::size_t kMaxCutShifts = 5;

struct QuadrantJoin {
  Table top_left, top_right, bottom_left, bottom_right;
  std::size_t join_column = 0;  // 0-based, in the source table
  std::size_t row_cut = 0;      // rows [0, cut) form the top half

  /// (TL, TR) and (BL, BR) labeled 1; (TL, BR) and (BL, TR) labeled 0.
  std::vector<GeneratedPair> pairs() const;
};

/// Columns that may serve as join column: not Float, unique fraction >= 0.8.
std::vector<std::size_t> join_candidates(const Table& table);

/// Splits a table around a random eligible join column into four quadrants.
/// Returns nullopt (and sets `reason`) when the table is too small, has no
/// eligible column, or no row cut within the shift budget separates the
/// join values of the two halves.
std::optional<QuadrantJoin> gen_quadrant_join(const Table& table, Rng& rng, std::string* reason = nullptr);

// ---------------------------------------------------------------------------
// CKAN-style subsets

struct CkanSubset {
  std::array<std::vector<std::size_t>, 4> partitions;  // source row ids
  std::size_t chosen = 0;                               // i
  Table part;             // S_i
  Table positive_right;   // S_i with two other subsets
  Table negative_right;   // the three other subsets

  std::vector<GeneratedPair> pairs() const;
};

/// Requires more than 100 rows. Rows are shuffled and `row_count mod 4`
/// of them dropped so the four subsets have equal size.
std::optional<CkanSubset> gen_ckan_subset(const Table& table, Rng& rng, std::string* reason = nullptr);

// ---------------------------------------------------------------------------
// Variant corpora

enum class VariantPreset {
  Subset,   // 11 row/column sampling and shuffling variants
  NearDup,  // 7 deletion variants: 1/2/5/10 rows, 1/2/3 columns
};

std::string_view to_string(VariantPreset preset);
VariantPreset variant_preset_from_string(std::string_view name);

struct Variant {
  Table table;
  std::string kind;
  std::string parent;
};

/// Variant kinds of a preset, in generation order.
std::vector<std::string> variant_kinds(VariantPreset preset);

/// Subset preset: needs >= 4 rows and columns. NearDup preset: needs more
/// than 10 rows and more than 3 columns. Sampled rows and columns keep the
/// source order.
std::optional<std::vector<Variant>> gen_subset_variants(const Table& table, Rng& rng,
                                                        VariantPreset preset = VariantPreset::Subset,
                                                        std::string* reason = nullptr);

// ---------------------------------------------------------------------------
// Corpus drivers

struct VariantRecord {
  std::string table_id;
  std::string kind;
  std::string parent;
};

enum class BenchmarkKind { QuadrantJoin, CkanSubset, Variants };

std::string_view to_string(BenchmarkKind kind);
BenchmarkKind benchmark_kind_from_string(std::string_view name);

struct Benchmark {
  BenchmarkKind kind = BenchmarkKind::QuadrantJoin;
  VariantPreset preset = VariantPreset::Subset;
  std::uint64_t seed = 0;
  std::vector<Table> tables;   // the generated corpus
  std::vector<Table> queries;  // variant benchmarks: the source tables
  std::vector<GeneratedPair> pairs;
  std::vector<VariantRecord> variants;
  GroundTruth ground_truth;
  std::vector<std::string> skipped;  // "<table id>: <reason>"
};

/// Per-table generator seed, independent of corpus order.
std::uint64_t table_seed(std::uint64_t seed, std::string_view table_id);

/// Runs one generator over every source table. Ground truth: quadrant joins
/// map each quadrant to its positive partner; CKAN subsets map S_i to its
/// positive right side; variants map each source to its variants.
Benchmark generate_benchmark(std::span<const Table> sources, BenchmarkKind kind, std::uint64_t seed,
                             VariantPreset preset = VariantPreset::Subset);

/// Table count, mean rows and columns, and the percentage of columns of each
/// type.
nlohmann::json stats_report(std::span<const Table> corpus);

/// Writes `<out>/tables/*.csv`, `<out>/queries/*.csv` (variants only),
/// `<out>/manifest.jsonl` (a header line with the seed, then one record per
/// pair or variant), `<out>/ground_truth.json` and `<out>/stats.json`.
void write_benchmark(const Benchmark& bench, const std::filesystem::path& out);

}  // namespace lakesketch
