#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lakesketch/sketch.hpp"
#include "lakesketch/tokenizer.hpp"

namespace lakesketch {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Rng = std::mt19937_64;

inline constexpr std::size_t kColumnTypeSlots = 5;  // 0 = description, 1..4 = ColumnType
inline constexpr std::size_t kSegmentSlots = 2;

struct EncoderConfig {
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t ffn = 256;
  std::size_t vocab_size = kReservedTokens;
  std::size_t max_seq_len = 512;
  std::size_t max_columns = 64;
  std::size_t num_perm = 256;
  double dropout = 0.1;
  std::uint64_t init_seed = 0;
  /// Replace the transformer stack with two dense layers over the mean
  /// input embedding.
  bool mlp_mode = false;

  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct Linear {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
};

struct LayerNormParams {
  Matrix gamma;  // 1 x hidden
  Matrix beta;
};

struct TransformerBlock {
  Linear query, key, value, output;
  LayerNormParams attention_norm;
  Linear ffn_in, ffn_out;
  LayerNormParams ffn_norm;
};

enum class TaskKind { Mlm, Binary, Regression, Multilabel };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

struct TaskHead {
  TaskKind kind = TaskKind::Binary;
  double dropout = 0.1;
  Linear linear;

  std::size_t outputs() const { return static_cast<std::size_t>(linear.weight.cols()); }
};

class EncoderModel {
 public:
  EncoderModel() = default;
  /// Random normal(0, 0.02) initialization seeded by config.init_seed.
  explicit EncoderModel(EncoderConfig config);

  const EncoderConfig& config() const { return config_; }

  /// Adds (or replaces) a task head. `outputs` is only used for multilabel.
  TaskHead& add_head(TaskKind kind, std::size_t outputs = 0);
  bool has_head(TaskKind kind) const { return heads.count(kind) != 0; }
  const TaskHead& head(TaskKind kind) const;
  TaskHead& head(TaskKind kind);

  /// Same shapes, all zeros. Used for gradients and optimizer moments.
  EncoderModel zeros_like() const;

  /// Re-draws every non-head parameter from a fresh seed.
  void reinitialize_encoder(std::uint64_t seed);

  std::size_t parameter_count() const;

  template <class F>
  void for_each_parameter(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each_parameter(F&& f) const {
    visit(*this, f);
  }

  Matrix token_embedding;
  Matrix token_position_embedding;
  Matrix column_position_embedding;
  Matrix column_type_embedding;
  Matrix segment_embedding;
  Linear minhash_projection;    // 2*num_perm -> hidden
  Linear numerical_projection;  // 16 -> hidden
  std::vector<TransformerBlock> blocks;
  Linear mlp_in, mlp_out;  // mlp_mode only
  Linear pooler;
  std::map<TaskKind, TaskHead> heads;

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f);

  void initialize_encoder(Rng& rng);

  EncoderConfig config_;
};

/// Encoder input: the token layout plus per-token sketch vectors.
struct SketchInput {
  InputString text;
  std::vector<std::int32_t> segments;
  Matrix minhash;    // L x 2*num_perm, values in [0, 1]
  Matrix numerical;  // L x 16

  std::size_t size() const { return text.size(); }
};

/// Ablation switches. A disabled stream is zeroed in the assembled input.
struct SketchStreams {
  bool minhash = true;    // column cell/word MinHash slots
  bool numerical = true;  // numerical sketch slots
  bool snapshot = true;   // content snapshot slots of description tokens

  friend bool operator==(const SketchStreams&, const SketchStreams&) = default;
};

/// Maps a MinHash slot to [0, 1].
inline double minhash_unit(std::uint64_t v) { return static_cast<double>(v) * 0x1p-64; }

SketchInput assemble_input(const TableSketch& sketch, const Vocabulary& vocab,
                           const EncoderConfig& config, const SketchStreams& streams = {});
SketchInput assemble_pair_input(const TableSketch& a, const TableSketch& b, const Vocabulary& vocab,
                                const EncoderConfig& config, const SketchStreams& streams = {});

/// Signed log1p applied to numerical sketch features before projection.
double squash_numeric(double x);

/// Sum of the six (seven for pairs) embedding streams, no dropout.
Matrix embed(const SketchInput& input, const EncoderModel& model);

struct LayerNormCache {
  Matrix normalized;               // L x H
  Eigen::VectorXd inverse_stddev;  // L
};

struct BlockCache {
  Matrix input, q, k, v, context, attention_out, attention_mask;
  std::vector<Matrix> probs;  // per head, L x L
  LayerNormCache norm1;
  Matrix after_norm1, ffn_pre, ffn_act, ffn_out, ffn_mask;
  LayerNormCache norm2;
};

struct ForwardCache {
  Matrix embedding_mask;  // dropout scale per element, empty in eval mode
  std::vector<BlockCache> blocks;
  std::vector<std::uint8_t> key_mask;
  Matrix cls_hidden, pooled;
  Matrix mlp_mean, mlp_pre1, mlp_act1, mlp_pre2;
};

struct EncoderOutput {
  Matrix hidden;  // L x H
  Matrix pooled;  // 1 x H
};

/// Runs the encoder. `key_mask[j] == 0` hides position j from attention.
/// Dropout is applied only when `train` is set, drawing from `rng`.
EncoderOutput forward(const SketchInput& input, const EncoderModel& model, bool train = false,
                      Rng* rng = nullptr, ForwardCache* cache = nullptr,
                      std::span<const std::uint8_t> key_mask = {});

/// Accumulates parameter gradients into `grads` given upstream gradients of
/// the hidden states and the pooled vector (either may be empty).
void backward(const SketchInput& input, const EncoderModel& model, const ForwardCache& cache,
              const Matrix& d_hidden, const Matrix& d_pooled, EncoderModel& grads);

struct HeadCache {
  Matrix input;  // after dropout
  Matrix mask;
};

/// Applies a task head (dropout + linear) to rows of `input`.
Matrix head_forward(const EncoderModel& model, TaskKind kind, const Matrix& input, bool train = false,
                    Rng* rng = nullptr, HeadCache* cache = nullptr);

/// Returns the gradient with respect to the head input.
Matrix head_backward(const EncoderModel& model, TaskKind kind, const HeadCache& cache,
                     const Matrix& d_logits, EncoderModel& grads);

double gelu(double x);
double gelu_derivative(double x);

// ---------------------------------------------------------------------------

template <class Self, class F>
void EncoderModel::visit(Self& self, F& f) {
  auto linear = [&](const std::string& name, auto& l) {
    f(name + ".weight", l.weight);
    f(name + ".bias", l.bias);
  };
  auto norm = [&](const std::string& name, auto& n) {
    f(name + ".gamma", n.gamma);
    f(name + ".beta", n.beta);
  };
  f(std::string("embeddings.token"), self.token_embedding);
  f(std::string("embeddings.token_position"), self.token_position_embedding);
  f(std::string("embeddings.column_position"), self.column_position_embedding);
  f(std::string("embeddings.column_type"), self.column_type_embedding);
  f(std::string("embeddings.segment"), self.segment_embedding);
  linear("minhash", self.minhash_projection);
  linear("numerical", self.numerical_projection);
  for (std::size_t i = 0; i < self.blocks.size(); ++i) {
    const auto prefix = "blocks." + std::to_string(i) + ".";
    auto& b = self.blocks[i];
    linear(prefix + "query", b.query);
    linear(prefix + "key", b.key);
    linear(prefix + "value", b.value);
    linear(prefix + "output", b.output);
    norm(prefix + "attention_norm", b.attention_norm);
    linear(prefix + "ffn_in", b.ffn_in);
    linear(prefix + "ffn_out", b.ffn_out);
    norm(prefix + "ffn_norm", b.ffn_norm);
  }
  if (self.config_.mlp_mode) {
    linear("mlp.in", self.mlp_in);
    linear("mlp.out", self.mlp_out);
  } else {
    linear("pooler", self.pooler);
  }
  for (auto& [kind, head] : self.heads) {
    linear("head." + std::string(to_string(kind)), head.linear);
  }
}

}  // namespace lakesketch
