#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lakesketch/encoder.hpp"
#include "lakesketch/sketch.hpp"
#include "lakesketch/table.hpp"
#include "lakesketch/tokenizer.hpp"

namespace lakesketch {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 20;
  /// Optimizer steps after which training stops (0 = no limit).
  std::size_t max_steps = 0;
  std::size_t patience = 5;
  double mlm_prob = 0.15;
  std::uint64_t seed = 0;
  /// Only task-head parameters are updated.
  bool frozen_encoder = false;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Losses. Each returns the mean loss and its gradient w.r.t. the inputs.

struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

/// -(1/N) sum_i log softmax(logits_i)[label_i].
LossResult cross_entropy(const Matrix& logits, std::span<const int> labels);
/// Mean over N of (pred - target)^2. `pred` is N x 1.
LossResult mse(const Matrix& pred, std::span<const double> target);
/// Mean over N*K of the sigmoid binary cross-entropy.
LossResult bce_with_logits(const Matrix& logits, const Matrix& targets);

// ---------------------------------------------------------------------------
// Pretraining

struct MaskedExample {
  SketchInput input;  // token ids already replaced by [MASK]
  std::vector<std::pair<std::size_t, TokenId>> labels;  // (position, original id)
  int masked_column = 0;  // 1-based
};

/// One example per masked column: every column when there are at most five,
/// otherwise five distinct random columns. Each example also masks
/// description tokens i.i.d. with probability `train.mlm_prob`. Columns whose
/// name has no tokens are never chosen.
std::vector<MaskedExample> make_mlm_examples(const TableSketch& sketch, const Vocabulary& vocab,
                                             const EncoderConfig& config, const TrainConfig& train,
                                             Rng& rng, const SketchStreams& streams = {});
std::vector<MaskedExample> make_mlm_examples(const Table& table, const Vocabulary& vocab,
                                             const EncoderConfig& config, const TrainConfig& train,
                                             Rng& rng, const SketchConfig& sketch_config = {},
                                             const SketchStreams& streams = {});

/// Tracks validation loss and signals a stop after `patience` epochs without
/// improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  /// Returns true when `loss` is a new best.
  bool update(double loss);
  bool should_stop() const { return stale_ >= patience_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t stale_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_metric = 0.0;
  std::size_t steps = 0;
};

struct TrainResult {
  EncoderModel best;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

nlohmann::json to_json(const TrainResult& result, const TrainConfig& config);

/// Adam (beta 0.9 / 0.999, eps 1e-8) over every parameter block accepted
/// by `filter` (all blocks when empty).
class Adam {
 public:
  using Filter = std::function<bool(const std::string&)>;

  Adam(const EncoderModel& model, double lr, Filter filter = {});
  void step(EncoderModel& model, const EncoderModel& grads);
  std::size_t steps() const { return t_; }

 private:
  double lr_;
  Filter filter_;
  EncoderModel m_, v_;
  std::size_t t_ = 0;
};

/// Masked-language-model pretraining. Adds an MLM head when missing.
/// Stops after `patience` epochs without validation improvement, at
/// max_epochs or at max_steps; returns the best-validation model.
/// Throws TrainingDiverged on a non-finite loss or parameter.
TrainResult pretrain(std::span<const TableSketch> train, std::span<const TableSketch> valid,
                     const Vocabulary& vocab, EncoderModel model, const TrainConfig& config,
                     const SketchStreams& streams = {});

/// Mean MLM loss over deterministic examples (seeded by `seed`).
double mlm_loss(std::span<const TableSketch> tables, const Vocabulary& vocab, const EncoderModel& model,
                const TrainConfig& config, std::uint64_t seed, const SketchStreams& streams = {});

// ---------------------------------------------------------------------------
// Finetuning

/// class id (binary), real score (regression) or bit vector (multilabel).
using PairLabel = std::variant<int, double, std::vector<std::uint8_t>>;

struct PairExample {
  TableSketch table_a;
  TableSketch table_b;
  PairLabel label;
};

/// [CLS] A-desc [SEP] A-cols [SEP] [SEP] B-desc [SEP] B-cols [SEP], segment 0
/// for A and 1 for B.
SketchInput build_cross_encoder_input(const TableSketch& a, const TableSketch& b, const Vocabulary& vocab,
                                      const EncoderConfig& config, const SketchStreams& streams = {});

/// Checks that every label matches `task`; throws InvalidArgument otherwise.
void check_labels(std::span<const PairExample> examples, TaskKind task);

/// Cross-encoder finetuning of the pooled [CLS] output through a task head.
/// Validation metric: weighted F1 (binary, multilabel bits) or R2 (regression).
TrainResult finetune(std::span<const PairExample> train, std::span<const PairExample> valid,
                     const Vocabulary& vocab, EncoderModel model, TaskKind task, const TrainConfig& config,
                     const SketchStreams& streams = {});

/// Head output for one pair in eval mode.
Matrix predict_pair(const EncoderModel& model, TaskKind task, const SketchInput& input);
/// Scalar relevance: P(class 1) for binary, the value for regression, mean
/// sigmoid for multilabel.
double pair_score(const EncoderModel& model, TaskKind task, const SketchInput& input);

struct Evaluation {
  double loss = 0.0;
  double metric = 0.0;
  std::vector<int> predicted_classes;
  std::vector<double> predicted_values;
};

Evaluation evaluate_pairs(std::span<const PairExample> examples, const Vocabulary& vocab,
                          const EncoderModel& model, TaskKind task, const SketchStreams& streams = {});

// ---------------------------------------------------------------------------
// Sketch ablation

inline constexpr std::array<std::string_view, 3> kSketchFamilies = {"minhash", "numerical", "snapshot"};

/// Streams with only `family` enabled, or with only `family` disabled.
SketchStreams only_stream(std::string_view family);
SketchStreams without_stream(std::string_view family);

struct AblationRow {
  std::string family;
  double only = 0.0;     // validation metric with this sketch alone
  double without = 0.0;  // validation metric with this sketch zeroed
};

/// Finetunes `model` under each of the six stream settings and reports the
/// validation metric of the best epoch.
std::vector<AblationRow> ablate_sketches(std::span<const PairExample> train, std::span<const PairExample> valid,
                                         const Vocabulary& vocab, const EncoderModel& model, TaskKind task,
                                         const TrainConfig& config);

// ---------------------------------------------------------------------------
// Data utilities

struct AugmentedTables {
  std::vector<Table> tables;
  bool has_duplicates = false;
};

/// n column orders of `table`, identity first. When fewer than n distinct
/// permutations exist, duplicates are emitted and flagged.
AugmentedTables augment_column_orders(const Table& table, std::size_t n, Rng& rng);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
};

/// Shuffled k-fold partition of indices 0..n-1; each index validates once.
std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// One record of a pair manifest (JSON lines).
struct ManifestRecord {
  std::filesystem::path table_a_path;
  std::filesystem::path table_b_path;
  std::string task;
  nlohmann::json label;
};

/// Reads `{table_a_path, table_b_path, task, label}` lines. Relative paths are
/// resolved against the manifest's directory; header lines (`"header": true`)
/// are skipped. Throws FormatError on schema violations.
std::vector<ManifestRecord> read_pair_manifest(const std::filesystem::path& path);

/// Task kind for a manifest task name (`*-binary`, `*-regression`, `multilabel`).
TaskKind task_kind_for(std::string_view task);
PairLabel parse_label(const nlohmann::json& label, TaskKind kind);

}  // namespace lakesketch
