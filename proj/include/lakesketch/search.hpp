#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lakesketch/encoder.hpp"
#include "lakesketch/sketch.hpp"

namespace lakesketch {

using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Embeddings

struct SketchEmbeddings {
  Vector table;                // pooled [CLS], unit norm
  std::vector<Vector> columns;  // one per kept column, unit norm
};

/// One eval-mode forward pass. Columns dropped by truncation get no
/// embedding.
SketchEmbeddings embed_sketch(const TableSketch& sketch, const EncoderModel& model, const Vocabulary& vocab,
                              const SketchStreams& streams = {});

/// Mean of the final hidden states over the column's token span (name tokens
/// and trailing [SEP]), L2-normalized. `column_position` is 1-based.
Vector column_embedding(const TableSketch& sketch, int column_position, const EncoderModel& model,
                        const Vocabulary& vocab, const SketchStreams& streams = {});
Vector table_embedding(const TableSketch& sketch, const EncoderModel& model, const Vocabulary& vocab,
                       const SketchStreams& streams = {});

/// 1 - cos(a, b); 1 when either vector is zero.
double cosine_distance(const Vector& a, const Vector& b);

/// Each vector standardized to mean 0 and variance 1 over its own
/// components, then concatenated. A constant vector becomes zeros.
Vector concat_normalized(const Vector& e1, const Vector& e2);

// ---------------------------------------------------------------------------
// Exact embedding index

struct IndexEntry {
  std::string table_id;
  int column_position = 0;  // 0 for table-level entries
  Vector embedding;
};

struct Neighbor {
  std::size_t entry = 0;
  double distance = 0.0;
};

/// Brute-force cosine index over column or table embeddings.
class EmbeddingIndex {
 public:
  void add(std::string table_id, int column_position, Vector embedding);
  std::size_t size() const { return entries_.size(); }
  std::size_t dim() const { return entries_.empty() ? 0 : static_cast<std::size_t>(entries_[0].embedding.size()); }
  const IndexEntry& entry(std::size_t i) const { return entries_.at(i); }
  const std::vector<IndexEntry>& entries() const { return entries_; }

  /// The `n` nearest entries, ascending by distance, ties by
  /// (table_id, column_position). Entries of `exclude_table` are skipped.
  std::vector<Neighbor> nearest(const Vector& query, std::size_t n, const std::string& exclude_table = {}) const;

 private:
  std::vector<IndexEntry> entries_;
};

/// The nearest min(3k, |index|) entries.
std::vector<Neighbor> knn_search(const EmbeddingIndex& index, const Vector& query, std::size_t k,
                                 const std::string& exclude_table = {});

void save_index(const EmbeddingIndex& index, const std::filesystem::path& header);
EmbeddingIndex load_index(const std::filesystem::path& header);

// ---------------------------------------------------------------------------
// Nearest tables

struct ColumnMatch {
  int query_column = 0;
  int matched_column = 0;
  double distance = 0.0;
};

struct RankedResult {
  std::string table_id;
  std::size_t matched_columns = 0;  // Rank 1
  double distance_sum = 0.0;        // Rank 2
  std::vector<ColumnMatch> per_column;
};

/// Ranks tables by the number of query columns they match (descending),
/// then by the sum of per-column minimum distances (ascending), then by id.
/// `query_columns[i]` is the embedding of query column i + 1. The query's
/// own table is excluded from retrieval. Returns at most k tables.
std::vector<RankedResult> near_tables(const std::string& query_id, std::span<const Vector> query_columns,
                                      const EmbeddingIndex& index, std::size_t k);
std::vector<RankedResult> near_tables(const TableSketch& query, const EmbeddingIndex& index,
                                      const EncoderModel& model, const Vocabulary& vocab, std::size_t k,
                                      const SketchStreams& streams = {});

struct TableHit {
  std::string table_id;
  double distance = 0.0;
};

/// Exact KNN over table embeddings, the query's own id excluded.
std::vector<TableHit> subset_search(const std::string& query_id, const Vector& query, const EmbeddingIndex& tables,
                                    std::size_t k);
std::vector<TableHit> subset_search(const TableSketch& query, const EmbeddingIndex& tables,
                                    const EncoderModel& model, const Vocabulary& vocab, std::size_t k,
                                    const SketchStreams& streams = {});

/// Top-k neighbours of every table in the corpus.
std::map<std::string, std::vector<TableHit>> near_duplicate_scan(const EmbeddingIndex& tables, std::size_t k);
std::map<std::string, std::vector<TableHit>> near_duplicate_scan(std::span<const TableSketch> corpus,
                                                                 const EncoderModel& model, const Vocabulary& vocab,
                                                                 std::size_t k, const SketchStreams& streams = {});

// ---------------------------------------------------------------------------
// LSH Forest

/// MinHash LSH Forest. Tree t indexes the slot range
/// [t * prefix, (t + 1) * prefix) as a sorted list of prefixes; a query
/// descends from the full prefix to shorter ones until enough candidates are
/// collected, then ranks them by exact slot-match fraction.
class LshForest {
 public:
  explicit LshForest(std::size_t num_trees = 8);

  void add(std::string key, MinHashSignature signature);
  /// Sorts the prefix lists. Queries before index() see nothing.
  void index();

  /// Top-k keys by slot-match fraction, ties by key. At most
  /// `candidate_factor * k` candidates are rescored.
  std::vector<std::pair<std::string, double>> query(const MinHashSignature& signature, std::size_t k,
                                                    std::size_t candidate_factor = 10) const;

  std::size_t size() const { return keys_.size(); }
  std::size_t num_trees() const { return num_trees_; }
  const std::string& key(std::size_t i) const { return keys_.at(i); }
  const MinHashSignature& signature(std::size_t i) const { return signatures_.at(i); }

 private:
  std::size_t prefix_length() const;

  std::size_t num_trees_;
  std::vector<std::string> keys_;
  std::vector<MinHashSignature> signatures_;
  std::vector<std::vector<std::size_t>> trees_;  // entry ids sorted by tree prefix
  bool indexed_ = false;
};

nlohmann::json to_json(const LshForest& forest);
LshForest lsh_forest_from_json(const nlohmann::json& json);

// ---------------------------------------------------------------------------
// Retrieve and rerank

struct ScoredCandidate {
  std::string table_id;
  double score = 0.0;
};

using Retriever = std::function<std::vector<std::string>(std::size_t n)>;
using Scorer = std::function<double(const std::string& candidate)>;

/// Stable sort of `candidates` by descending score, truncated to k.
std::vector<ScoredCandidate> rerank(std::span<const std::string> candidates, const Scorer& scorer, std::size_t k);

struct RerankOutcome {
  std::vector<std::string> retrieved;  // stage one, in retriever order
  std::vector<ScoredCandidate> ranked;  // stage two
};

RerankOutcome retrieve_and_rerank(const Retriever& retriever, const Scorer& scorer, std::size_t k,
                                  std::size_t n_retrieve = 100);

// ---------------------------------------------------------------------------
// Interchange

/// One line of a search result file.
struct SearchRecord {
  std::string query_id;
  std::size_t rank = 0;  // 1-based
  std::string table_id;
  std::size_t matched_columns = 0;
  double distance_sum = 0.0;
  double score = 0.0;

  friend bool operator==(const SearchRecord&, const SearchRecord&) = default;
};

void write_search_results(std::span<const SearchRecord> records, const std::filesystem::path& path);
std::vector<SearchRecord> read_search_results(const std::filesystem::path& path);
/// Table ids per query, in rank order.
std::map<std::string, std::vector<std::string>> ranked_lists(std::span<const SearchRecord> records);

/// External column vectors keyed by (table_id, column_position).
using ValueEmbeddings = std::map<std::pair<std::string, int>, Vector>;
ValueEmbeddings load_value_embeddings(const std::filesystem::path& path);

}  // namespace lakesketch
