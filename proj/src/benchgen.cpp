#include "lakesketch/benchgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "lakesketch/errors.hpp"
#include "lakesketch/hashing.hpp"

namespace lakesketch {

using nlohmann::json;

namespace {

std::vector<std::size_t> iota_vector(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

/// Random subset of 0..n-1 of the given size, ascending.
std::vector<std::size_t> sample_sorted(std::size_t n, std::size_t count, Rng& rng) {
  const auto all = iota_vector(n);
  std::vector<std::size_t> out;
  out.reserve(count);
  std::sample(all.begin(), all.end(), std::back_inserter(out), count, rng);
  return out;
}

std::size_t percent_of(std::size_t n, std::size_t pct) { return std::max<std::size_t>(1, (n * pct + 50) / 100); }

std::optional<std::string> normalized_cell(const std::string& cell) {
  if (is_null_cell(cell)) return std::nullopt;
  return to_lower(trim(cell));
}

bool fail(std::string* reason, std::string text) {
  if (reason) *reason = std::move(text);
  return false;
}

Table subtable(const Table& t, std::span<const std::size_t> rows, std::span<const std::size_t> cols, std::string id) {
  return select_rows(select_columns(t, cols, id), rows, id);
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadrant joins

std::vector<GeneratedPair> QuadrantJoin::pairs() const {
  return {{top_left.id, top_right.id, "join-binary", 1},
          {bottom_left.id, bottom_right.id, "join-binary", 1},
          {top_left.id, bottom_right.id, "join-binary", 0},
          {bottom_left.id, top_right.id, "join-binary", 0}};
}

std::vector<std::size_t> join_candidates(const Table& table) {
  std::vector<std::size_t> out;
  if (table.row_count == 0) return out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& col = table.columns[c];
    if (col.type == ColumnType::Float) continue;
    std::set<std::string> unique;
    for (const auto& cell : col.cells) {
      if (auto v = normalized_cell(cell)) unique.insert(*v);
    }
    if (static_cast<double>(unique.size()) >= kJoinUniqueFraction * static_cast<double>(table.row_count)) {
      out.push_back(c);
    }
  }
  return out;
}

std::optional<QuadrantJoin> gen_quadrant_join(const Table& table, Rng& rng, std::string* reason) {
  if (table.columns.size() < 2 || table.row_count < 4) {
    fail(reason, "needs at least 2 columns and 4 rows");
    return std::nullopt;
  }
  const auto candidates = join_candidates(table);
  if (candidates.empty()) {
    fail(reason, "no non-float column with mostly unique values");
    return std::nullopt;
  }
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const auto join = candidates[pick(rng)];
  const auto& col = table.columns[join];

  // Sort rows by the join value; nulls last.
  auto order = iota_vector(table.row_count);
  std::vector<std::optional<std::string>> text(table.row_count);
  std::vector<std::optional<double>> number(table.row_count);
  for (std::size_t r = 0; r < table.row_count; ++r) {
    text[r] = normalized_cell(col.cells[r]);
    if (is_numeric(col.type)) number[r] = numeric_value(col.cells[r], col.type);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (text[a].has_value() != text[b].has_value()) return text[a].has_value();
    if (number[a] && number[b] && *number[a] != *number[b]) return *number[a] < *number[b];
    if (number[a].has_value() != number[b].has_value()) return number[a].has_value();
    return text[a] < text[b];
  });

  const auto n = table.row_count;
  const auto disjoint_at = [&](std::size_t cut) {
    std::set<std::string> top;
    for (std::size_t i = 0; i < cut; ++i) {
      if (text[order[i]]) top.insert(*text[order[i]]);
    }
    for (std::size_t i = cut; i < n; ++i) {
      if (text[order[i]] && top.count(*text[order[i]])) return false;
    }
    return true;
  };
  // Midpoint, then +1, -1, +2, -2, ... up to the shift budget.
  std::optional<std::size_t> cut;
  const auto mid = static_cast<std::ptrdiff_t>(n / 2);
  for (std::size_t attempt = 0; attempt <= kMaxCutShifts && !cut; ++attempt) {
    const auto step = static_cast<std::ptrdiff_t>((attempt + 1) / 2);
    const auto c = attempt % 2 == 1 ? mid + step : mid - step;
    if (c < 1 || c > static_cast<std::ptrdiff_t>(n) - 1) continue;
    if (disjoint_at(static_cast<std::size_t>(c))) cut = static_cast<std::size_t>(c);
  }
  if (!cut) {
    fail(reason, "join values of the two row halves overlap at every tried cut");
    return std::nullopt;
  }

  std::vector<std::size_t> others;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c != join) others.push_back(c);
  }
  const auto half = (others.size() + 1) / 2;
  std::vector<std::size_t> left{join}, right{join};
  left.insert(left.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(half));
  right.insert(right.end(), others.begin() + static_cast<std::ptrdiff_t>(half), others.end());
  const std::span<const std::size_t> top(order.data(), *cut);
  const std::span<const std::size_t> bottom(order.data() + *cut, n - *cut);

  QuadrantJoin q;
  q.join_column = join;
  q.row_cut = *cut;
  q.top_left = subtable(table, top, left, table.id + "__tl");
  q.top_right = subtable(table, top, right, table.id + "__tr");
  q.bottom_left = subtable(table, bottom, left, table.id + "__bl");
  q.bottom_right = subtable(table, bottom, right, table.id + "__br");
  return q;
}

// ---------------------------------------------------------------------------
// CKAN-style subsets

std::vector<GeneratedPair> CkanSubset::pairs() const {
  return {{part.id, positive_right.id, "subset-binary", 1}, {part.id, negative_right.id, "subset-binary", 0}};
}

std::optional<CkanSubset> gen_ckan_subset(const Table& table, Rng& rng, std::string* reason) {
  if (table.row_count <= 100) {
    fail(reason, "needs more than 100 rows");
    return std::nullopt;
  }
  auto rows = iota_vector(table.row_count);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto size = table.row_count / 4;
  CkanSubset s;
  for (std::size_t p = 0; p < 4; ++p) {
    auto& part = s.partitions[p];
    part.assign(rows.begin() + static_cast<std::ptrdiff_t>(p * size),
                rows.begin() + static_cast<std::ptrdiff_t>((p + 1) * size));
    std::sort(part.begin(), part.end());
  }
  s.chosen = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
  std::vector<std::size_t> rest;
  for (std::size_t p = 0; p < 4; ++p) {
    if (p != s.chosen) rest.push_back(p);
  }
  // Two distinct others join S_i on the positive side.
  std::shuffle(rest.begin(), rest.end(), rng);
  std::vector<std::size_t> positive_parts{s.chosen, rest[0], rest[1]};
  std::sort(positive_parts.begin(), positive_parts.end());
  std::sort(rest.begin(), rest.end());

  const auto concat = [&](const std::vector<std::size_t>& parts) {
    std::vector<std::size_t> out;
    for (auto p : parts) out.insert(out.end(), s.partitions[p].begin(), s.partitions[p].end());
    return out;
  };
  s.part = select_rows(table, s.partitions[s.chosen], table.id + "__s" + std::to_string(s.chosen + 1));
  s.positive_right = select_rows(table, concat(positive_parts), table.id + "__pos");
  s.negative_right = select_rows(table, concat(rest), table.id + "__neg");
  return s;
}

// ---------------------------------------------------------------------------
// Variant corpora

std::string_view to_string(VariantPreset preset) { return preset == VariantPreset::Subset ? "subset" : "neardup"; }

VariantPreset variant_preset_from_string(std::string_view name) {
  if (name == "subset") return VariantPreset::Subset;
  if (name == "neardup") return VariantPreset::NearDup;
  throw InvalidArgument("unknown variant preset '" + std::string(name) + "' (subset, neardup)");
}

std::vector<std::string> variant_kinds(VariantPreset preset) {
  if (preset == VariantPreset::Subset) {
    return {"rows25", "rows50", "rows75", "rows_shuffled", "cols25", "cols50",
            "cols75", "cols_shuffled", "rows25_cols25", "rows50_cols50", "rows75_cols75"};
  }
  return {"del_rows1", "del_rows2", "del_rows5", "del_rows10", "del_cols1", "del_cols2", "del_cols3"};
}

std::optional<std::vector<Variant>> gen_subset_variants(const Table& table, Rng& rng, VariantPreset preset,
                                                        std::string* reason) {
  const auto n = table.row_count, m = table.columns.size();
  if (preset == VariantPreset::Subset && (n < 4 || m < 4)) {
    fail(reason, "needs at least 4 rows and 4 columns");
    return std::nullopt;
  }
  if (preset == VariantPreset::NearDup && (n <= 10 || m <= 3)) {
    fail(reason, "needs more than 10 rows and more than 3 columns");
    return std::nullopt;
  }
  const auto all_rows = iota_vector(n), all_cols = iota_vector(m);
  std::vector<Variant> out;
  const auto emit = [&](const std::string& kind, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
    out.push_back({subtable(table, rows, cols, table.id + "__" + kind), kind, table.id});
  };
  if (preset == VariantPreset::Subset) {
    for (std::size_t pct : {25, 50, 75}) emit("rows" + std::to_string(pct), sample_sorted(n, percent_of(n, pct), rng), all_cols);
    auto shuffled = all_rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    emit("rows_shuffled", shuffled, all_cols);
    for (std::size_t pct : {25, 50, 75}) emit("cols" + std::to_string(pct), all_rows, sample_sorted(m, percent_of(m, pct), rng));
    auto cols = all_cols;
    std::shuffle(cols.begin(), cols.end(), rng);
    emit("cols_shuffled", all_rows, cols);
    for (std::size_t pct : {25, 50, 75}) {
      const auto rows = sample_sorted(n, percent_of(n, pct), rng);
      emit("rows" + std::to_string(pct) + "_cols" + std::to_string(pct), rows,
           sample_sorted(m, percent_of(m, pct), rng));
    }
  } else {
    for (std::size_t d : {1, 2, 5, 10}) emit("del_rows" + std::to_string(d), sample_sorted(n, n - d, rng), all_cols);
    for (std::size_t d : {1, 2, 3}) emit("del_cols" + std::to_string(d), all_rows, sample_sorted(m, m - d, rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus drivers

std::string_view to_string(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::QuadrantJoin: return "join";
    case BenchmarkKind::CkanSubset: return "ckan-subset";
    case BenchmarkKind::Variants: return "variants";
  }
  return "join";
}

BenchmarkKind benchmark_kind_from_string(std::string_view name) {
  if (name == "join") return BenchmarkKind::QuadrantJoin;
  if (name == "ckan-subset") return BenchmarkKind::CkanSubset;
  if (name == "variants") return BenchmarkKind::Variants;
  throw InvalidArgument("unknown benchmark kind '" + std::string(name) + "' (join, ckan-subset, variants)");
}

std::uint64_t table_seed(std::uint64_t seed, std::string_view table_id) {
  return splitmix64(seed ^ HashFamily{HashKind::Fnv1a, 0}(table_id));
}

Benchmark generate_benchmark(std::span<const Table> sources, BenchmarkKind kind, std::uint64_t seed,
                             VariantPreset preset) {
  Benchmark b;
  b.kind = kind;
  b.preset = preset;
  b.seed = seed;
  std::set<std::string> ids;
  for (const auto& t : sources) {
    if (!ids.insert(t.id).second) throw InvalidArgument("duplicate source table id '" + t.id + "'");
  }
  for (const auto& source : sources) {
    Rng rng(table_seed(seed, source.id));
    std::string reason;
    switch (kind) {
      case BenchmarkKind::QuadrantJoin: {
        auto q = gen_quadrant_join(source, rng, &reason);
        if (!q) break;
        for (auto& p : q->pairs()) b.pairs.push_back(std::move(p));
        b.ground_truth[q->top_left.id] = {q->top_right.id};
        b.ground_truth[q->top_right.id] = {q->top_left.id};
        b.ground_truth[q->bottom_left.id] = {q->bottom_right.id};
        b.ground_truth[q->bottom_right.id] = {q->bottom_left.id};
        for (auto* t : {&q->top_left, &q->top_right, &q->bottom_left, &q->bottom_right}) b.tables.push_back(std::move(*t));
        break;
      }
      case BenchmarkKind::CkanSubset: {
        auto s = gen_ckan_subset(source, rng, &reason);
        if (!s) break;
        for (auto& p : s->pairs()) b.pairs.push_back(std::move(p));
        b.ground_truth[s->part.id] = {s->positive_right.id};
        for (auto* t : {&s->part, &s->positive_right, &s->negative_right}) b.tables.push_back(std::move(*t));
        break;
      }
      case BenchmarkKind::Variants: {
        auto vs = gen_subset_variants(source, rng, preset, &reason);
        if (!vs) break;
        auto& truth = b.ground_truth[source.id];
        for (auto& v : *vs) {
          truth.insert(v.table.id);
          b.variants.push_back({v.table.id, v.kind, v.parent});
          b.tables.push_back(std::move(v.table));
        }
        b.queries.push_back(source);
        break;
      }
    }
    if (!reason.empty()) b.skipped.push_back(source.id + ": " + reason);
  }
  return b;
}

json stats_report(std::span<const Table> corpus) {
  std::map<std::string, std::size_t> types;
  for (auto t : {ColumnType::String, ColumnType::Integer, ColumnType::Float, ColumnType::Date}) {
    types[std::string(to_string(t))] = 0;
  }
  std::size_t rows = 0, cols = 0;
  for (const auto& t : corpus) {
    rows += t.row_count;
    cols += t.columns.size();
    for (const auto& c : t.columns) ++types[std::string(to_string(c.type))];
  }
  const double n = static_cast<double>(corpus.size());
  json percent = json::object();
  for (const auto& [name, count] : types) {
    percent[name] = cols == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(cols);
  }
  return {{"tables", corpus.size()},
          {"avg_rows", corpus.empty() ? 0.0 : static_cast<double>(rows) / n},
          {"avg_cols", corpus.empty() ? 0.0 : static_cast<double>(cols) / n},
          {"columns", cols},
          {"type_percent", percent}};
}

namespace {

void write_table(const Table& t, const std::filesystem::path& dir) {
  write_csv(t, dir / (t.id + ".csv"));
  if (!t.description.empty()) {
    std::ofstream desc(dir / (t.id + ".desc.txt"), std::ios::binary);
    if (!desc) throw IoError("cannot write description of " + t.id);
    desc << t.description;
  }
}

}  // namespace

void write_benchmark(const Benchmark& bench, const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  fs::create_directories(out / "tables");
  for (const auto& t : bench.tables) write_table(t, out / "tables");
  if (!bench.queries.empty()) {
    fs::create_directories(out / "queries");
    for (const auto& t : bench.queries) write_table(t, out / "queries");
  }

  std::ofstream manifest(out / "manifest.jsonl", std::ios::binary);
  if (!manifest) throw IoError("cannot write " + (out / "manifest.jsonl").string());
  json header = {{"header", true}, {"seed", bench.seed}, {"generator", to_string(bench.kind)}};
  if (bench.kind == BenchmarkKind::Variants) header["preset"] = to_string(bench.preset);
  header["skipped"] = bench.skipped;
  manifest << header.dump() << '\n';
  const auto path_of = [](const std::string& id) { return "tables/" + id + ".csv"; };
  for (const auto& p : bench.pairs) {
    manifest << json{{"table_a_path", path_of(p.table_a)},
                     {"table_b_path", path_of(p.table_b)},
                     {"task", p.task},
                     {"label", p.label}}
                    .dump()
             << '\n';
  }
  for (const auto& v : bench.variants) {
    manifest << json{{"table_path", path_of(v.table_id)}, {"table_id", v.table_id}, {"kind", v.kind},
                     {"parent", v.parent}}
                    .dump()
             << '\n';
  }
  if (!manifest) throw IoError("failed writing manifest");

  save_ground_truth(bench.ground_truth, out / "ground_truth.json");
  std::ofstream stats(out / "stats.json", std::ios::binary);
  if (!stats) throw IoError("cannot write stats.json");
  stats << stats_report(bench.tables).dump(2) << '\n';
}

}  // namespace lakesketch
