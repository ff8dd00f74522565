#include "lakesketch/search.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <tuple>

#include "lakesketch/checkpoint.hpp"
#include "lakesketch/errors.hpp"

namespace lakesketch {

using nlohmann::json;

namespace {

Vector normalized(Vector v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

Vector standardized(const Vector& v) {
  if (v.size() == 0) return v;
  const double mean = v.mean();
  const double var = (v.array() - mean).square().mean();
  if (var == 0.0) {
    spdlog::warn("concat_normalized: zero-variance vector standardized to zeros");
    return Vector::Zero(v.size());
  }
  return (v.array() - mean) / std::sqrt(var);
}

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite components");
}

}  // namespace

// ---------------------------------------------------------------------------
// Embeddings

SketchEmbeddings embed_sketch(const TableSketch& sketch, const EncoderModel& model, const Vocabulary& vocab,
                              const SketchStreams& streams) {
  const auto input = assemble_input(sketch, vocab, model.config(), streams);
  const auto out = forward(input, model);
  SketchEmbeddings e;
  e.table = normalized(out.pooled.row(0).transpose());
  for (const auto& span : input.text.spans) {
    if (span.table != 0 || span.column == 0) continue;
    const auto rows = static_cast<Eigen::Index>(span.end - span.begin);
    Vector mean = out.hidden.middleRows(static_cast<Eigen::Index>(span.begin), rows).colwise().mean().transpose();
    e.columns.push_back(normalized(std::move(mean)));
  }
  return e;
}

Vector column_embedding(const TableSketch& sketch, int column_position, const EncoderModel& model,
                        const Vocabulary& vocab, const SketchStreams& streams) {
  if (column_position < 1 || static_cast<std::size_t>(column_position) > sketch.columns.size()) {
    throw InvalidArgument("column position " + std::to_string(column_position) + " out of range 1.." +
                          std::to_string(sketch.columns.size()));
  }
  auto e = embed_sketch(sketch, model, vocab, streams);
  if (static_cast<std::size_t>(column_position) > e.columns.size()) {
    throw InvalidArgument("column " + std::to_string(column_position) + " of " + sketch.table_id +
                          " was truncated from the input");
  }
  return std::move(e.columns[static_cast<std::size_t>(column_position - 1)]);
}

Vector table_embedding(const TableSketch& sketch, const EncoderModel& model, const Vocabulary& vocab,
                       const SketchStreams& streams) {
  return embed_sketch(sketch, model, vocab, streams).table;
}

double cosine_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("cosine distance of vectors with different dimensions");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - a.dot(b) / (na * nb);
}

Vector concat_normalized(const Vector& e1, const Vector& e2) {
  check_finite(e1, "first embedding");
  check_finite(e2, "second embedding");
  Vector out(e1.size() + e2.size());
  out << standardized(e1), standardized(e2);
  return out;
}

// ---------------------------------------------------------------------------
// Exact embedding index

void EmbeddingIndex::add(std::string table_id, int column_position, Vector embedding) {
  if (!entries_.empty() && embedding.size() != entries_[0].embedding.size()) {
    throw ShapeError("embedding dimension " + std::to_string(embedding.size()) + " differs from index dimension " +
                     std::to_string(dim()));
  }
  check_finite(embedding, "embedding");
  entries_.push_back({std::move(table_id), column_position, std::move(embedding)});
}

std::vector<Neighbor> EmbeddingIndex::nearest(const Vector& query, std::size_t n,
                                              const std::string& exclude_table) const {
  if (entries_.empty()) throw InvalidArgument("search over an empty index");
  std::vector<Neighbor> all;
  all.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!exclude_table.empty() && entries_[i].table_id == exclude_table) continue;
    all.push_back({i, cosine_distance(query, entries_[i].embedding)});
  }
  const auto less = [&](const Neighbor& a, const Neighbor& b) {
    const auto& ea = entries_[a.entry];
    const auto& eb = entries_[b.entry];
    return std::tie(a.distance, ea.table_id, ea.column_position) < std::tie(b.distance, eb.table_id, eb.column_position);
  };
  n = std::min(n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), less);
  all.resize(n);
  return all;
}

std::vector<Neighbor> knn_search(const EmbeddingIndex& index, const Vector& query, std::size_t k,
                                 const std::string& exclude_table) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  return index.nearest(query, 3 * k, exclude_table);
}

void save_index(const EmbeddingIndex& index, const std::filesystem::path& header) {
  TensorFile file;
  json entries = json::array();
  Matrix m(static_cast<Eigen::Index>(index.size()), static_cast<Eigen::Index>(index.dim()));
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& e = index.entry(i);
    entries.push_back({e.table_id, e.column_position});
    m.row(static_cast<Eigen::Index>(i)) = e.embedding.transpose();
  }
  file.meta = {{"kind", "embedding-index"}, {"metric", "cosine"}, {"dim", index.dim()}, {"entries", entries}};
  file.blocks.emplace_back("embeddings", std::move(m));
  write_tensor_file(header, file);
}

EmbeddingIndex load_index(const std::filesystem::path& header) {
  auto file = read_tensor_file(header);
  if (file.meta.value("kind", "") != "embedding-index" || file.blocks.size() != 1) {
    throw FormatError(header.string() + " is not an embedding index");
  }
  const auto& m = file.blocks[0].second;
  const auto& entries = file.meta.at("entries");
  if (entries.size() != static_cast<std::size_t>(m.rows())) throw FormatError("index entry count mismatch");
  EmbeddingIndex index;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    index.add(entries[i].at(0).get<std::string>(), entries[i].at(1).get<int>(),
              m.row(static_cast<Eigen::Index>(i)).transpose());
  }
  return index;
}

// ---------------------------------------------------------------------------
// Nearest tables

std::vector<RankedResult> near_tables(const std::string& query_id, std::span<const Vector> query_columns,
                                      const EmbeddingIndex& index, std::size_t k) {
  if (query_columns.empty()) throw InvalidArgument("query has no columns");
  std::map<std::string, RankedResult> tables;
  for (std::size_t q = 0; q < query_columns.size(); ++q) {
    // Per-table minimum over this query column's neighbours. Neighbours
    // arrive sorted, so the first hit of a table is its minimum.
    std::set<std::string> seen;
    for (const auto& hit : knn_search(index, query_columns[q], k, query_id)) {
      const auto& e = index.entry(hit.entry);
      if (!seen.insert(e.table_id).second) continue;
      auto& r = tables[e.table_id];
      r.table_id = e.table_id;
      r.per_column.push_back({static_cast<int>(q + 1), e.column_position, hit.distance});
      ++r.matched_columns;
      r.distance_sum += hit.distance;
    }
  }
  std::vector<RankedResult> out;
  out.reserve(tables.size());
  for (auto& [id, r] : tables) out.push_back(std::move(r));
  std::stable_sort(out.begin(), out.end(), [](const RankedResult& a, const RankedResult& b) {
    if (a.matched_columns != b.matched_columns) return a.matched_columns > b.matched_columns;
    return a.distance_sum < b.distance_sum;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<RankedResult> near_tables(const TableSketch& query, const EmbeddingIndex& index,
                                      const EncoderModel& model, const Vocabulary& vocab, std::size_t k,
                                      const SketchStreams& streams) {
  const auto e = embed_sketch(query, model, vocab, streams);
  return near_tables(query.table_id, e.columns, index, k);
}

std::vector<TableHit> subset_search(const std::string& query_id, const Vector& query, const EmbeddingIndex& tables,
                                    std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  std::vector<TableHit> out;
  for (const auto& n : tables.nearest(query, k, query_id)) out.push_back({tables.entry(n.entry).table_id, n.distance});
  return out;
}

std::vector<TableHit> subset_search(const TableSketch& query, const EmbeddingIndex& tables,
                                    const EncoderModel& model, const Vocabulary& vocab, std::size_t k,
                                    const SketchStreams& streams) {
  return subset_search(query.table_id, table_embedding(query, model, vocab, streams), tables, k);
}

std::map<std::string, std::vector<TableHit>> near_duplicate_scan(const EmbeddingIndex& tables, std::size_t k) {
  std::map<std::string, std::vector<TableHit>> out;
  for (const auto& e : tables.entries()) out[e.table_id] = subset_search(e.table_id, e.embedding, tables, k);
  return out;
}

std::map<std::string, std::vector<TableHit>> near_duplicate_scan(std::span<const TableSketch> corpus,
                                                                 const EncoderModel& model, const Vocabulary& vocab,
                                                                 std::size_t k, const SketchStreams& streams) {
  EmbeddingIndex index;
  for (const auto& t : corpus) index.add(t.table_id, 0, table_embedding(t, model, vocab, streams));
  return near_duplicate_scan(index, k);
}

// ---------------------------------------------------------------------------
// LSH Forest

LshForest::LshForest(std::size_t num_trees) : num_trees_(num_trees) {
  if (num_trees == 0) throw InvalidArgument("LSH Forest needs at least one tree");
}

std::size_t LshForest::prefix_length() const {
  return signatures_.empty() ? 0 : signatures_[0].num_perm() / num_trees_;
}

void LshForest::add(std::string key, MinHashSignature signature) {
  if (signature.num_perm() == 0 || signature.num_perm() % num_trees_ != 0) {
    throw InvalidArgument("num_perm " + std::to_string(signature.num_perm()) + " is not a multiple of " +
                          std::to_string(num_trees_) + " trees");
  }
  if (!signatures_.empty() && (signature.num_perm() != signatures_[0].num_perm() ||
                               !(signature.family == signatures_[0].family))) {
    throw IncompatibleSketchError("signature family or length differs from the forest's");
  }
  keys_.push_back(std::move(key));
  signatures_.push_back(std::move(signature));
  indexed_ = false;
}

void LshForest::index() {
  const auto len = prefix_length();
  trees_.assign(num_trees_, {});
  for (std::size_t t = 0; t < num_trees_; ++t) {
    auto& tree = trees_[t];
    tree.resize(keys_.size());
    std::iota(tree.begin(), tree.end(), 0);
    const auto off = static_cast<std::ptrdiff_t>(t * len);
    const auto n = static_cast<std::ptrdiff_t>(len);
    std::stable_sort(tree.begin(), tree.end(), [&](std::size_t a, std::size_t b) {
      const auto& va = signatures_[a].values;
      const auto& vb = signatures_[b].values;
      return std::lexicographical_compare(va.begin() + off, va.begin() + off + n, vb.begin() + off,
                                          vb.begin() + off + n);
    });
  }
  indexed_ = true;
}

std::vector<std::pair<std::string, double>> LshForest::query(const MinHashSignature& signature, std::size_t k,
                                                             std::size_t candidate_factor) const {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  if (!indexed_) throw InvalidArgument("LSH Forest queried before index()");
  if (keys_.empty()) return {};
  if (signature.num_perm() != signatures_[0].num_perm() || !(signature.family == signatures_[0].family)) {
    throw IncompatibleSketchError("query signature family or length differs from the forest's");
  }
  const auto len = prefix_length();
  const auto cap = candidate_factor * k;
  std::vector<std::size_t> candidates;
  std::vector<std::uint8_t> taken(keys_.size(), 0);
  for (std::size_t r = len; r >= 1 && candidates.size() < cap; --r) {
    for (std::size_t t = 0; t < num_trees_ && candidates.size() < cap; ++t) {
      const auto off = static_cast<std::ptrdiff_t>(t * len);
      const auto n = static_cast<std::ptrdiff_t>(r);
      const auto* q = signature.values.data() + off;
      const auto& tree = trees_[t];
      // Entries whose first r slots of this tree equal the query's.
      const auto cmp_less = [&](std::size_t e, const std::uint64_t* p) {
        const auto* v = signatures_[e].values.data() + off;
        return std::lexicographical_compare(v, v + n, p, p + n);
      };
      const auto cmp_greater = [&](const std::uint64_t* p, std::size_t e) {
        const auto* v = signatures_[e].values.data() + off;
        return std::lexicographical_compare(p, p + n, v, v + n);
      };
      auto lo = std::lower_bound(tree.begin(), tree.end(), q, cmp_less);
      auto hi = std::upper_bound(lo, tree.end(), q, cmp_greater);
      for (auto it = lo; it != hi && candidates.size() < cap; ++it) {
        if (!taken[*it]) {
          taken[*it] = 1;
          candidates.push_back(*it);
        }
      }
    }
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(candidates.size());
  for (auto c : candidates) out.emplace_back(keys_[c], jaccard_estimate(signature, signatures_[c]));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

json to_json(const LshForest& forest) {
  json keys = json::array(), sigs = json::array();
  for (std::size_t i = 0; i < forest.size(); ++i) {
    keys.push_back(forest.key(i));
    sigs.push_back(forest.signature(i).values);
  }
  json family = json::object();
  if (forest.size() > 0) {
    const auto& f = forest.signature(0).family;
    family = {{"kind", to_string(f.kind)}, {"seed", f.seed}};
  }
  return {{"kind", "lsh-forest"}, {"num_trees", forest.num_trees()}, {"family", family},
          {"keys", keys},         {"signatures", sigs}};
}

LshForest lsh_forest_from_json(const json& j) {
  try {
    if (j.at("kind") != "lsh-forest") throw FormatError("not an LSH Forest");
    LshForest forest(j.at("num_trees").get<std::size_t>());
    const auto& keys = j.at("keys");
    const auto& sigs = j.at("signatures");
    if (keys.size() != sigs.size()) throw FormatError("LSH Forest key and signature counts differ");
    HashFamily family;
    if (!keys.empty()) {
      family.kind = hash_kind_from_string(j.at("family").at("kind").get<std::string>());
      family.seed = j.at("family").at("seed").get<std::uint64_t>();
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
      forest.add(keys[i].get<std::string>(), {sigs[i].get<std::vector<std::uint64_t>>(), family});
    }
    forest.index();
    return forest;
  } catch (const json::exception& e) {
    throw FormatError(std::string("invalid LSH Forest: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Retrieve and rerank

std::vector<ScoredCandidate> rerank(std::span<const std::string> candidates, const Scorer& scorer, std::size_t k) {
  std::vector<ScoredCandidate> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back({c, scorer(c)});
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.score > b.score; });
  if (out.size() > k) out.resize(k);
  return out;
}

RerankOutcome retrieve_and_rerank(const Retriever& retriever, const Scorer& scorer, std::size_t k,
                                  std::size_t n_retrieve) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  RerankOutcome out;
  out.retrieved = retriever(n_retrieve);
  if (out.retrieved.size() > n_retrieve) out.retrieved.resize(n_retrieve);
  out.ranked = rerank(out.retrieved, scorer, k);
  return out;
}

// ---------------------------------------------------------------------------
// Interchange

void write_search_results(std::span<const SearchRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) {
    out << json{{"query_id", r.query_id},
                {"rank", r.rank},
                {"table_id", r.table_id},
                {"matched_columns", r.matched_columns},
                {"distance_sum", r.distance_sum},
                {"score", r.score}}
               .dump()
        << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<SearchRecord> read_search_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<SearchRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("query_id").get<std::string>(), j.at("rank").get<std::size_t>(),
                     j.at("table_id").get<std::string>(), j.value("matched_columns", std::size_t{0}),
                     j.value("distance_sum", 0.0), j.value("score", 0.0)});
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, std::vector<std::string>> ranked_lists(std::span<const SearchRecord> records) {
  std::map<std::string, std::vector<std::pair<std::size_t, std::string>>> by_query;
  for (const auto& r : records) by_query[r.query_id].emplace_back(r.rank, r.table_id);
  std::map<std::string, std::vector<std::string>> out;
  for (auto& [q, hits] : by_query) {
    std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& list = out[q];
    for (auto& h : hits) list.push_back(std::move(h.second));
  }
  return out;
}

ValueEmbeddings load_value_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ValueEmbeddings out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      const auto v = j.at("vector").get<std::vector<double>>();
      out[{j.at("table_id").get<std::string>(), j.at("column_position").get<int>()}] =
          Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lakesketch
