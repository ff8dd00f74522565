#include "lakesketch/encoder.hpp"

#include <cmath>
#include <limits>

#include "lakesketch/errors.hpp"

namespace lakesketch {

namespace {

constexpr double kInitStddev = 0.02;
constexpr double kLayerNormEps = 1e-12;

void fill_normal(Matrix& m, Rng& rng) {
  std::normal_distribution<double> dist(0.0, kInitStddev);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

Linear make_linear(std::size_t in, std::size_t out, Rng& rng) {
  Linear l{Matrix(in, out), Matrix::Zero(1, static_cast<Eigen::Index>(out))};
  fill_normal(l.weight, rng);
  return l;
}

LayerNormParams make_norm(std::size_t hidden) {
  const auto h = static_cast<Eigen::Index>(hidden);
  return {Matrix::Ones(1, h), Matrix::Zero(1, h)};
}

Matrix embedding_table(std::size_t rows, std::size_t hidden, Rng& rng) {
  Matrix m(rows, hidden);
  fill_normal(m, rng);
  return m;
}

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Mlm: return "mlm";
    case TaskKind::Binary: return "binary";
    case TaskKind::Regression: return "regression";
    case TaskKind::Multilabel: return "multilabel";
  }
  return "binary";
}

TaskKind task_kind_from_string(std::string_view name) {
  for (auto kind : {TaskKind::Mlm, TaskKind::Binary, TaskKind::Regression, TaskKind::Multilabel}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown task: " + std::string(name));
}

void EncoderConfig::validate() const {
  if (hidden == 0 || heads == 0 || hidden % heads != 0) {
    throw InvalidArgument("hidden size must be a positive multiple of the head count");
  }
  if (!mlp_mode && layers == 0) throw InvalidArgument("encoder needs at least one layer");
  if (ffn == 0 || num_perm == 0 || max_seq_len < 8 || max_columns == 0) {
    throw InvalidArgument("encoder dimensions must be positive (max_seq_len >= 8)");
  }
  if (vocab_size < kReservedTokens) throw InvalidArgument("vocab_size must cover the reserved tokens");
  if (dropout < 0.0 || dropout >= 1.0) throw InvalidArgument("dropout must be in [0, 1)");
}

EncoderModel::EncoderModel(EncoderConfig config) : config_(config) {
  config_.validate();
  Rng rng(config_.init_seed);
  initialize_encoder(rng);
}

void EncoderModel::initialize_encoder(Rng& rng) {
  const auto& c = config_;
  token_embedding = embedding_table(c.vocab_size, c.hidden, rng);
  token_position_embedding = embedding_table(c.max_seq_len, c.hidden, rng);
  column_position_embedding = embedding_table(c.max_columns + 1, c.hidden, rng);
  column_type_embedding = embedding_table(kColumnTypeSlots, c.hidden, rng);
  segment_embedding = embedding_table(kSegmentSlots, c.hidden, rng);
  minhash_projection = make_linear(2 * c.num_perm, c.hidden, rng);
  numerical_projection = make_linear(kNumericalSketchSize, c.hidden, rng);
  blocks.clear();
  if (c.mlp_mode) {
    mlp_in = make_linear(c.hidden, c.ffn, rng);
    mlp_out = make_linear(c.ffn, c.hidden, rng);
    pooler = {};
  } else {
    for (std::size_t i = 0; i < c.layers; ++i) {
      TransformerBlock b;
      b.query = make_linear(c.hidden, c.hidden, rng);
      b.key = make_linear(c.hidden, c.hidden, rng);
      b.value = make_linear(c.hidden, c.hidden, rng);
      b.output = make_linear(c.hidden, c.hidden, rng);
      b.attention_norm = make_norm(c.hidden);
      b.ffn_in = make_linear(c.hidden, c.ffn, rng);
      b.ffn_out = make_linear(c.ffn, c.hidden, rng);
      b.ffn_norm = make_norm(c.hidden);
      blocks.push_back(std::move(b));
    }
    pooler = make_linear(c.hidden, c.hidden, rng);
  }
}

void EncoderModel::reinitialize_encoder(std::uint64_t seed) {
  Rng rng(seed);
  initialize_encoder(rng);
}

TaskHead& EncoderModel::add_head(TaskKind kind, std::size_t outputs) {
  std::size_t n = 0;
  switch (kind) {
    case TaskKind::Mlm: n = config_.vocab_size; break;
    case TaskKind::Binary: n = 2; break;
    case TaskKind::Regression: n = 1; break;
    case TaskKind::Multilabel:
      if (outputs == 0) throw InvalidArgument("multilabel head needs a label count");
      n = outputs;
      break;
  }
  // Heads draw from their own stream so adding one never perturbs the encoder.
  Rng rng(config_.init_seed ^ (0x5EED0000ULL + static_cast<std::uint64_t>(kind)));
  TaskHead head{kind, config_.dropout, make_linear(config_.hidden, n, rng)};
  return heads[kind] = std::move(head);
}

const TaskHead& EncoderModel::head(TaskKind kind) const {
  auto it = heads.find(kind);
  if (it == heads.end()) throw InvalidArgument("model has no '" + std::string(to_string(kind)) + "' head");
  return it->second;
}

TaskHead& EncoderModel::head(TaskKind kind) {
  auto it = heads.find(kind);
  if (it == heads.end()) throw InvalidArgument("model has no '" + std::string(to_string(kind)) + "' head");
  return it->second;
}

EncoderModel EncoderModel::zeros_like() const {
  EncoderModel out = *this;
  out.for_each_parameter([](const std::string&, Matrix& m) { m.setZero(); });
  return out;
}

std::size_t EncoderModel::parameter_count() const {
  std::size_t n = 0;
  for_each_parameter([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

// ---------------------------------------------------------------------------
// Input assembly

namespace {

TableMetadata metadata_of(const TableSketch& sketch) {
  TableMetadata meta;
  meta.description = sketch.description;
  meta.column_names = sketch.column_names;
  for (const auto& c : sketch.columns) meta.column_types.push_back(c.type);
  return meta;
}

void copy_signature(Matrix& dst, Eigen::Index row, Eigen::Index offset, const MinHashSignature& sig) {
  for (std::size_t i = 0; i < sig.values.size(); ++i) {
    dst(row, offset + static_cast<Eigen::Index>(i)) = minhash_unit(sig.values[i]);
  }
}

SketchInput fill_sketches(InputString text, std::span<const TableSketch* const> tables,
                          const EncoderConfig& config, const SketchStreams& streams) {
  const auto num_perm = config.num_perm;
  for (const auto* t : tables) {
    if (t->content_snapshot.num_perm() != num_perm) {
      throw IncompatibleSketchError("sketch num_perm " + std::to_string(t->content_snapshot.num_perm()) +
                                    " does not match encoder num_perm " + std::to_string(num_perm));
    }
  }
  SketchInput input;
  const auto L = static_cast<Eigen::Index>(text.size());
  input.minhash = Matrix::Zero(L, static_cast<Eigen::Index>(2 * num_perm));
  input.numerical = Matrix::Zero(L, static_cast<Eigen::Index>(kNumericalSketchSize));
  input.segments.assign(text.size(), 0);
  const auto second = static_cast<Eigen::Index>(num_perm);

  for (const auto& span : text.spans) {
    const auto& sketch = *tables[static_cast<std::size_t>(span.table)];
    for (auto t = span.begin; t < span.end; ++t) {
      const auto row = static_cast<Eigen::Index>(t);
      input.segments[t] = span.table;
      if (span.column == 0) {
        if (streams.snapshot) copy_signature(input.minhash, row, 0, sketch.content_snapshot);
        continue;
      }
      const auto& col = sketch.columns.at(static_cast<std::size_t>(span.column - 1));
      if (streams.minhash) {
        copy_signature(input.minhash, row, 0, col.cells);
        if (col.words) copy_signature(input.minhash, row, second, *col.words);
      }
      if (streams.numerical) {
        for (std::size_t i = 0; i < kNumericalSketchSize; ++i) {
          input.numerical(row, static_cast<Eigen::Index>(i)) = col.numerical[i];
        }
      }
    }
  }
  input.text = std::move(text);
  return input;
}

}  // namespace

SketchInput assemble_input(const TableSketch& sketch, const Vocabulary& vocab,
                           const EncoderConfig& config, const SketchStreams& streams) {
  auto text = encode_metadata(metadata_of(sketch), vocab, config.max_seq_len, config.max_columns);
  const TableSketch* tables[] = {&sketch};
  return fill_sketches(std::move(text), tables, config, streams);
}

SketchInput assemble_pair_input(const TableSketch& a, const TableSketch& b, const Vocabulary& vocab,
                                const EncoderConfig& config, const SketchStreams& streams) {
  auto text = encode_pair_metadata(metadata_of(a), metadata_of(b), vocab, config.max_seq_len,
                                   config.max_columns);
  const TableSketch* tables[] = {&a, &b};
  return fill_sketches(std::move(text), tables, config, streams);
}

// ---------------------------------------------------------------------------
// Forward / backward

double squash_numeric(double x) { return std::copysign(std::log1p(std::abs(x)), x); }

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_derivative(double x) {
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

namespace {

Matrix affine(const Matrix& x, const Linear& l) {
  Matrix out = x * l.weight;
  out.rowwise() += l.bias.row(0);
  return out;
}

// dy is the upstream gradient; returns dx and accumulates parameter grads.
Matrix affine_backward(const Matrix& x, const Linear& l, const Matrix& dy, Linear& grad) {
  grad.weight.noalias() += x.transpose() * dy;
  grad.bias += dy.colwise().sum();
  return dy * l.weight.transpose();
}

Matrix layer_norm(const Matrix& x, const LayerNormParams& p, LayerNormCache& cache) {
  const auto L = x.rows();
  const auto H = static_cast<double>(x.cols());
  cache.normalized.resize(L, x.cols());
  cache.inverse_stddev.resize(L);
  for (Eigen::Index r = 0; r < L; ++r) {
    const double mean = x.row(r).sum() / H;
    const auto centered = (x.row(r).array() - mean).matrix();
    const double var = centered.squaredNorm() / H;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inverse_stddev(r) = inv;
    cache.normalized.row(r) = centered * inv;
  }
  Matrix y = cache.normalized.array().rowwise() * p.gamma.row(0).array();
  y.rowwise() += p.beta.row(0);
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const LayerNormParams& p, const LayerNormCache& cache,
                           LayerNormParams& grad) {
  grad.gamma += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  grad.beta += dy.colwise().sum();
  const auto H = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const Eigen::RowVectorXd dxhat = (dy.row(r).array() * p.gamma.row(0).array()).matrix();
    const auto xhat = cache.normalized.row(r);
    const double mean_d = dxhat.sum() / H;
    const double mean_dx = dxhat.dot(xhat) / H;
    dx.row(r) = cache.inverse_stddev(r) * (dxhat.array() - mean_d - xhat.array() * mean_dx).matrix();
  }
  return dx;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : 0.0;
  return mask;
}

bool dropout_active(bool train, double rate, Rng* rng) {
  if (train && rate > 0.0 && rng == nullptr) throw InvalidArgument("training mode needs an rng");
  return train && rate > 0.0;
}

void check_index(std::int64_t value, Eigen::Index rows, const char* what) {
  if (value < 0 || value >= rows) {
    throw InvalidArgument(std::string(what) + " index " + std::to_string(value) +
                          " out of embedding range");
  }
}

Matrix block_forward(const Matrix& x, const TransformerBlock& b, const EncoderConfig& cfg, bool train,
                     Rng* rng, std::span<const std::uint8_t> key_mask, BlockCache& c) {
  const auto L = x.rows();
  const auto heads = static_cast<Eigen::Index>(cfg.heads);
  const auto dh = static_cast<Eigen::Index>(cfg.hidden / cfg.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  c.input = x;
  c.q = affine(x, b.query);
  c.k = affine(x, b.key);
  c.v = affine(x, b.value);
  c.context.resize(L, x.cols());
  c.probs.assign(static_cast<std::size_t>(heads), Matrix());
  for (Eigen::Index h = 0; h < heads; ++h) {
    Matrix scores = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose() * scale;
    for (Eigen::Index i = 0; i < L; ++i) {
      double max = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < L; ++j) {
        if (!key_mask.empty() && !key_mask[static_cast<std::size_t>(j)]) continue;
        max = std::max(max, scores(i, j));
      }
      double sum = 0.0;
      for (Eigen::Index j = 0; j < L; ++j) {
        if (!key_mask.empty() && !key_mask[static_cast<std::size_t>(j)]) {
          scores(i, j) = 0.0;
          continue;
        }
        scores(i, j) = std::exp(scores(i, j) - max);
        sum += scores(i, j);
      }
      scores.row(i) /= sum;
    }
    c.context.middleCols(h * dh, dh) = scores * c.v.middleCols(h * dh, dh);
    c.probs[static_cast<std::size_t>(h)] = std::move(scores);
  }
  c.attention_out = affine(c.context, b.output);
  Matrix residual = x;
  if (dropout_active(train, cfg.dropout, rng)) {
    c.attention_mask = dropout_mask(L, x.cols(), cfg.dropout, *rng);
    residual += c.attention_out.cwiseProduct(c.attention_mask);
  } else {
    c.attention_mask.resize(0, 0);
    residual += c.attention_out;
  }
  c.after_norm1 = layer_norm(residual, b.attention_norm, c.norm1);

  c.ffn_pre = affine(c.after_norm1, b.ffn_in);
  c.ffn_act = c.ffn_pre.unaryExpr([](double v) { return gelu(v); });
  c.ffn_out = affine(c.ffn_act, b.ffn_out);
  Matrix residual2 = c.after_norm1;
  if (dropout_active(train, cfg.dropout, rng)) {
    c.ffn_mask = dropout_mask(L, x.cols(), cfg.dropout, *rng);
    residual2 += c.ffn_out.cwiseProduct(c.ffn_mask);
  } else {
    c.ffn_mask.resize(0, 0);
    residual2 += c.ffn_out;
  }
  return layer_norm(residual2, b.ffn_norm, c.norm2);
}

Matrix block_backward(const Matrix& d_out, const TransformerBlock& b, const EncoderConfig& cfg,
                      const BlockCache& c, TransformerBlock& g) {
  const auto heads = static_cast<Eigen::Index>(cfg.heads);
  const auto dh = static_cast<Eigen::Index>(cfg.hidden / cfg.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix d_res2 = layer_norm_backward(d_out, b.ffn_norm, c.norm2, g.ffn_norm);
  Matrix d_ffn_out = c.ffn_mask.size() ? Matrix(d_res2.cwiseProduct(c.ffn_mask)) : d_res2;
  Matrix d_act = affine_backward(c.ffn_act, b.ffn_out, d_ffn_out, g.ffn_out);
  Matrix d_pre = d_act.cwiseProduct(c.ffn_pre.unaryExpr([](double v) { return gelu_derivative(v); }));
  Matrix d_norm1 = d_res2 + affine_backward(c.after_norm1, b.ffn_in, d_pre, g.ffn_in);

  Matrix d_res1 = layer_norm_backward(d_norm1, b.attention_norm, c.norm1, g.attention_norm);
  Matrix d_attn = c.attention_mask.size() ? Matrix(d_res1.cwiseProduct(c.attention_mask)) : d_res1;
  Matrix d_context = affine_backward(c.context, b.output, d_attn, g.output);

  Matrix d_q(c.q.rows(), c.q.cols()), d_k(c.k.rows(), c.k.cols()), d_v(c.v.rows(), c.v.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    const auto& probs = c.probs[static_cast<std::size_t>(h)];
    const Matrix d_ctx = d_context.middleCols(h * dh, dh);
    Matrix d_probs = d_ctx * c.v.middleCols(h * dh, dh).transpose();
    d_v.middleCols(h * dh, dh) = probs.transpose() * d_ctx;
    const Eigen::VectorXd row_dot = (d_probs.array() * probs.array()).rowwise().sum();
    Matrix d_scores = (probs.array() * (d_probs.colwise() - row_dot).array()).matrix() * scale;
    d_q.middleCols(h * dh, dh) = d_scores * c.k.middleCols(h * dh, dh);
    d_k.middleCols(h * dh, dh) = d_scores.transpose() * c.q.middleCols(h * dh, dh);
  }
  Matrix d_x = d_res1;
  d_x += affine_backward(c.input, b.query, d_q, g.query);
  d_x += affine_backward(c.input, b.key, d_k, g.key);
  d_x += affine_backward(c.input, b.value, d_v, g.value);
  return d_x;
}

}  // namespace

Matrix embed(const SketchInput& input, const EncoderModel& model) {
  const auto& cfg = model.config();
  const auto L = static_cast<Eigen::Index>(input.size());
  const auto& text = input.text;
  if (input.minhash.rows() != L || input.minhash.cols() != static_cast<Eigen::Index>(2 * cfg.num_perm) ||
      input.numerical.rows() != L || input.numerical.cols() != static_cast<Eigen::Index>(kNumericalSketchSize) ||
      input.segments.size() != input.size()) {
    throw ShapeError("sketch input shape does not match the encoder configuration");
  }
  Matrix out = affine(input.minhash, model.minhash_projection);
  out += affine(input.numerical.unaryExpr([](double v) { return squash_numeric(v); }),
                model.numerical_projection);
  for (Eigen::Index t = 0; t < L; ++t) {
    const auto i = static_cast<std::size_t>(t);
    check_index(text.token_ids[i], model.token_embedding.rows(), "token");
    check_index(text.token_positions[i], model.token_position_embedding.rows(), "token position");
    check_index(text.column_positions[i], model.column_position_embedding.rows(), "column position");
    check_index(text.column_types[i], model.column_type_embedding.rows(), "column type");
    check_index(input.segments[i], model.segment_embedding.rows(), "segment");
    out.row(t) += model.token_embedding.row(text.token_ids[i]) +
                  model.token_position_embedding.row(text.token_positions[i]) +
                  model.column_position_embedding.row(text.column_positions[i]) +
                  model.column_type_embedding.row(text.column_types[i]) +
                  model.segment_embedding.row(input.segments[i]);
  }
  return out;
}

EncoderOutput forward(const SketchInput& input, const EncoderModel& model, bool train, Rng* rng,
                      ForwardCache* cache, std::span<const std::uint8_t> key_mask) {
  const auto& cfg = model.config();
  if (input.size() == 0) throw InvalidArgument("encoder input is empty");
  if (!key_mask.empty() && key_mask.size() != input.size()) {
    throw ShapeError("key mask length differs from the input length");
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.key_mask.assign(key_mask.begin(), key_mask.end());

  Matrix x = embed(input, model);
  if (dropout_active(train, cfg.dropout, rng)) {
    c.embedding_mask = dropout_mask(x.rows(), x.cols(), cfg.dropout, *rng);
    x = x.cwiseProduct(c.embedding_mask);
  } else {
    c.embedding_mask.resize(0, 0);
  }

  EncoderOutput out;
  if (cfg.mlp_mode) {
    c.blocks.clear();
    c.mlp_mean = x.colwise().mean();
    c.mlp_pre1 = affine(c.mlp_mean, model.mlp_in);
    c.mlp_act1 = c.mlp_pre1.unaryExpr([](double v) { return gelu(v); });
    c.mlp_pre2 = affine(c.mlp_act1, model.mlp_out);
    out.pooled = c.mlp_pre2.unaryExpr([](double v) { return gelu(v); });
    out.hidden = std::move(x);
    return out;
  }

  c.blocks.resize(model.blocks.size());
  for (std::size_t l = 0; l < model.blocks.size(); ++l) {
    x = block_forward(x, model.blocks[l], cfg, train, rng, key_mask, c.blocks[l]);
  }
  c.cls_hidden = x.topRows(1);
  out.pooled = affine(c.cls_hidden, model.pooler).unaryExpr([](double v) { return std::tanh(v); });
  c.pooled = out.pooled;
  out.hidden = std::move(x);
  return out;
}

void backward(const SketchInput& input, const EncoderModel& model, const ForwardCache& cache,
              const Matrix& d_hidden, const Matrix& d_pooled, EncoderModel& grads) {
  const auto& cfg = model.config();
  const auto L = static_cast<Eigen::Index>(input.size());
  const auto H = static_cast<Eigen::Index>(cfg.hidden);
  Matrix dx = d_hidden.size() ? d_hidden : Matrix(Matrix::Zero(L, H));

  if (cfg.mlp_mode) {
    if (d_pooled.size()) {
      Matrix d_pre2 = d_pooled.cwiseProduct(cache.mlp_pre2.unaryExpr([](double v) { return gelu_derivative(v); }));
      Matrix d_act1 = affine_backward(cache.mlp_act1, model.mlp_out, d_pre2, grads.mlp_out);
      Matrix d_pre1 = d_act1.cwiseProduct(cache.mlp_pre1.unaryExpr([](double v) { return gelu_derivative(v); }));
      Matrix d_mean = affine_backward(cache.mlp_mean, model.mlp_in, d_pre1, grads.mlp_in);
      dx.rowwise() += d_mean.row(0) / static_cast<double>(L);
    }
  } else {
    if (d_pooled.size()) {
      Matrix dz = d_pooled.cwiseProduct(Matrix(1.0 - cache.pooled.array().square()));
      dx.topRows(1) += affine_backward(cache.cls_hidden, model.pooler, dz, grads.pooler);
    }
    for (std::size_t l = model.blocks.size(); l-- > 0;) {
      dx = block_backward(dx, model.blocks[l], cfg, cache.blocks[l], grads.blocks[l]);
    }
  }

  if (cache.embedding_mask.size()) dx = dx.cwiseProduct(cache.embedding_mask);

  const auto& text = input.text;
  for (Eigen::Index t = 0; t < L; ++t) {
    const auto i = static_cast<std::size_t>(t);
    grads.token_embedding.row(text.token_ids[i]) += dx.row(t);
    grads.token_position_embedding.row(text.token_positions[i]) += dx.row(t);
    grads.column_position_embedding.row(text.column_positions[i]) += dx.row(t);
    grads.column_type_embedding.row(text.column_types[i]) += dx.row(t);
    grads.segment_embedding.row(input.segments[i]) += dx.row(t);
  }
  affine_backward(input.minhash, model.minhash_projection, dx, grads.minhash_projection);
  affine_backward(input.numerical.unaryExpr([](double v) { return squash_numeric(v); }),
                  model.numerical_projection, dx, grads.numerical_projection);
}

Matrix head_forward(const EncoderModel& model, TaskKind kind, const Matrix& input, bool train, Rng* rng,
                    HeadCache* cache) {
  const auto& head = model.head(kind);
  if (input.cols() != head.linear.weight.rows()) throw ShapeError("head input width mismatch");
  HeadCache local;
  HeadCache& c = cache ? *cache : local;
  if (dropout_active(train, head.dropout, rng)) {
    c.mask = dropout_mask(input.rows(), input.cols(), head.dropout, *rng);
    c.input = input.cwiseProduct(c.mask);
  } else {
    c.mask.resize(0, 0);
    c.input = input;
  }
  return affine(c.input, head.linear);
}

Matrix head_backward(const EncoderModel& model, TaskKind kind, const HeadCache& cache,
                     const Matrix& d_logits, EncoderModel& grads) {
  Matrix d_input = affine_backward(cache.input, model.head(kind).linear, d_logits, grads.head(kind).linear);
  if (cache.mask.size()) d_input = d_input.cwiseProduct(cache.mask);
  return d_input;
}

}  // namespace lakesketch
