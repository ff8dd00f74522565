#include "lakesketch/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "lakesketch/errors.hpp"
#include "lakesketch/eval.hpp"

namespace lakesketch {

using nlohmann::json;

void TrainConfig::validate() const {
  if (patience < 1) throw InvalidArgument("patience must be at least 1");
  if (batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("lr must be a finite non-negative number");
  if (mlm_prob < 0.0 || mlm_prob > 1.0) throw InvalidArgument("mlm_prob must be in [0, 1]");
}

// ---------------------------------------------------------------------------
// Losses

LossResult cross_entropy(const Matrix& logits, std::span<const int> labels) {
  const auto n = logits.rows();
  if (n == 0) throw InvalidArgument("cross-entropy over zero rows");
  if (static_cast<std::size_t>(n) != labels.size()) throw ShapeError("one label per logit row expected");
  LossResult r{0.0, Matrix(n, logits.cols())};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw InvalidArgument("label " + std::to_string(y) + " out of range");
    const double max = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - max).exp().matrix();
    const double sum = e.sum();
    r.loss -= logits(i, y) - max - std::log(sum);
    r.grad.row(i) = e / sum;
    r.grad(i, y) -= 1.0;
  }
  r.loss /= static_cast<double>(n);
  r.grad /= static_cast<double>(n);
  return r;
}

LossResult mse(const Matrix& pred, std::span<const double> target) {
  if (pred.cols() != 1 || static_cast<std::size_t>(pred.rows()) != target.size()) {
    throw ShapeError("mse expects N x 1 predictions and N targets");
  }
  if (target.empty()) throw InvalidArgument("mse over zero rows");
  const double n = static_cast<double>(target.size());
  LossResult r{0.0, Matrix(pred.rows(), 1)};
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    const double d = pred(i, 0) - target[static_cast<std::size_t>(i)];
    r.loss += d * d;
    r.grad(i, 0) = 2.0 * d / n;
  }
  r.loss /= n;
  return r;
}

LossResult bce_with_logits(const Matrix& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw ShapeError("logits and targets differ in shape");
  }
  if (logits.size() == 0) throw InvalidArgument("bce over zero elements");
  const double n = static_cast<double>(logits.size());
  LossResult r{0.0, Matrix(logits.rows(), logits.cols())};
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double x = logits.data()[i], t = targets.data()[i];
    r.loss += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
    r.grad.data()[i] = (1.0 / (1.0 + std::exp(-x)) - t) / n;
  }
  r.loss /= n;
  return r;
}

// ---------------------------------------------------------------------------
// Masking

std::vector<MaskedExample> make_mlm_examples(const TableSketch& sketch, const Vocabulary& vocab,
                                             const EncoderConfig& config, const TrainConfig& train,
                                             Rng& rng, const SketchStreams& streams) {
  const auto base = assemble_input(sketch, vocab, config, streams);
  std::vector<const TokenSpan*> eligible;
  const TokenSpan* description = nullptr;
  for (const auto& span : base.text.spans) {
    if (span.column == 0) {
      description = &span;
    } else if (span.name_end > span.name_begin) {
      eligible.push_back(&span);
    }
  }
  std::vector<const TokenSpan*> chosen;
  if (eligible.size() <= 5) {
    chosen = eligible;
  } else {
    std::sample(eligible.begin(), eligible.end(), std::back_inserter(chosen), 5, rng);
  }

  std::bernoulli_distribution coin(train.mlm_prob);
  std::vector<MaskedExample> out;
  for (const auto* span : chosen) {
    MaskedExample ex{base, {}, span->column};
    auto& ids = ex.input.text.token_ids;
    if (description) {
      for (auto t = description->name_begin; t < description->name_end; ++t) {
        if (train.mlm_prob > 0.0 && coin(rng)) {
          ex.labels.emplace_back(t, ids[t]);
          ids[t] = kMaskId;
        }
      }
    }
    for (auto t = span->name_begin; t < span->name_end; ++t) {
      ex.labels.emplace_back(t, ids[t]);
      ids[t] = kMaskId;
    }
    std::sort(ex.labels.begin(), ex.labels.end());
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<MaskedExample> make_mlm_examples(const Table& table, const Vocabulary& vocab,
                                             const EncoderConfig& config, const TrainConfig& train,
                                             Rng& rng, const SketchConfig& sketch_config,
                                             const SketchStreams& streams) {
  if (table.columns.empty()) throw ZeroColumnsError("cannot mask a table without columns");
  return make_mlm_examples(sketch_table(table, sketch_config), vocab, config, train, rng, streams);
}

// ---------------------------------------------------------------------------
// Optimizer and early stopping

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience_ < 1) throw InvalidArgument("patience must be at least 1");
}

bool EarlyStopping::update(double loss) {
  ++epoch_;
  if (loss < best_) {
    best_ = loss;
    best_epoch_ = epoch_;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

Adam::Adam(const EncoderModel& model, double lr, Filter filter)
    : lr_(lr), filter_(std::move(filter)), m_(model.zeros_like()), v_(model.zeros_like()) {}

void Adam::step(EncoderModel& model, const EncoderModel& grads) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  std::vector<Matrix*> params, ms, vs;
  std::vector<const Matrix*> gs;
  std::vector<bool> active;
  model.for_each_parameter([&](const std::string& name, Matrix& p) {
    params.push_back(&p);
    active.push_back(!filter_ || filter_(name));
  });
  grads.for_each_parameter([&](const std::string&, const Matrix& g) { gs.push_back(&g); });
  m_.for_each_parameter([&](const std::string&, Matrix& m) { ms.push_back(&m); });
  v_.for_each_parameter([&](const std::string&, Matrix& v) { vs.push_back(&v); });
  if (gs.size() != params.size() || ms.size() != params.size()) {
    throw ShapeError("optimizer state does not match the model");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!active[i]) continue;
    auto& m = *ms[i];
    auto& v = *vs[i];
    const auto& g = *gs[i];
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    params[i]->array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }
}

namespace {

void set_zero(EncoderModel& grads) {
  grads.for_each_parameter([](const std::string&, Matrix& m) { m.setZero(); });
}

void scale(EncoderModel& grads, double s) {
  grads.for_each_parameter([&](const std::string&, Matrix& m) { m *= s; });
}

void check_finite(const EncoderModel& model, std::size_t epoch, std::size_t step) {
  model.for_each_parameter([&](const std::string& name, const Matrix& m) {
    if (!m.allFinite()) {
      throw TrainingDiverged("parameter block " + name + " became non-finite at epoch " +
                             std::to_string(epoch) + ", step " + std::to_string(step));
    }
  });
}

void check_loss(double loss, std::size_t epoch, std::size_t step) {
  if (!std::isfinite(loss)) {
    throw TrainingDiverged("loss is " + std::to_string(loss) + " at epoch " + std::to_string(epoch) +
                           ", step " + std::to_string(step) + "; try a lower learning rate");
  }
}

Adam::Filter update_filter(const TrainConfig& config) {
  if (!config.frozen_encoder) return {};
  return [](const std::string& name) { return name.rfind("head.", 0) == 0; };
}

// Forward + backward of one MLM example; returns its loss.
double mlm_step(const MaskedExample& ex, const EncoderModel& model, bool train, Rng* rng,
                EncoderModel* grads) {
  if (ex.labels.empty()) return 0.0;
  ForwardCache cache;
  auto out = forward(ex.input, model, train, rng, &cache);
  Matrix rows(static_cast<Eigen::Index>(ex.labels.size()), out.hidden.cols());
  std::vector<int> labels;
  for (std::size_t i = 0; i < ex.labels.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = out.hidden.row(static_cast<Eigen::Index>(ex.labels[i].first));
    labels.push_back(ex.labels[i].second);
  }
  HeadCache head_cache;
  auto logits = head_forward(model, TaskKind::Mlm, rows, train, rng, &head_cache);
  auto loss = cross_entropy(logits, labels);
  if (grads) {
    Matrix d_rows = head_backward(model, TaskKind::Mlm, head_cache, loss.grad, *grads);
    Matrix d_hidden = Matrix::Zero(out.hidden.rows(), out.hidden.cols());
    for (std::size_t i = 0; i < ex.labels.size(); ++i) {
      d_hidden.row(static_cast<Eigen::Index>(ex.labels[i].first)) += d_rows.row(static_cast<Eigen::Index>(i));
    }
    backward(ex.input, model, cache, d_hidden, Matrix(), *grads);
  }
  return loss.loss;
}

constexpr std::uint64_t kValidSeedSalt = 0x7A11DA7EULL;

}  // namespace

double mlm_loss(std::span<const TableSketch> tables, const Vocabulary& vocab, const EncoderModel& model,
                const TrainConfig& config, std::uint64_t seed, const SketchStreams& streams) {
  Rng rng(seed);
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& t : tables) {
    for (const auto& ex : make_mlm_examples(t, vocab, model.config(), config, rng, streams)) {
      if (ex.labels.empty()) continue;
      total += mlm_step(ex, model, false, nullptr, nullptr);
      ++count;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

TrainResult pretrain(std::span<const TableSketch> train, std::span<const TableSketch> valid,
                     const Vocabulary& vocab, EncoderModel model, const TrainConfig& config,
                     const SketchStreams& streams) {
  config.validate();
  if (train.empty()) throw InvalidArgument("pretraining corpus is empty");
  if (valid.empty()) throw InvalidArgument("pretraining needs a validation split");
  if (!model.has_head(TaskKind::Mlm)) model.add_head(TaskKind::Mlm);

  Rng rng(config.seed);
  Adam adam(model, config.lr, update_filter(config));
  EarlyStopping stopper(config.patience);
  EncoderModel grads = model.zeros_like();
  TrainResult result;
  result.best = model;
  std::size_t steps = 0;
  bool out_of_steps = false;

  for (std::size_t epoch = 1; epoch <= config.max_epochs && !out_of_steps; ++epoch) {
    std::vector<MaskedExample> examples;
    for (const auto& t : train) {
      for (auto& ex : make_mlm_examples(t, vocab, model.config(), config, rng, streams)) {
        if (!ex.labels.empty()) examples.push_back(std::move(ex));
      }
    }
    std::shuffle(examples.begin(), examples.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < examples.size(); begin += config.batch_size) {
      const auto end = std::min(begin + config.batch_size, examples.size());
      set_zero(grads);
      double batch_loss = 0.0;
      for (auto i = begin; i < end; ++i) batch_loss += mlm_step(examples[i], model, true, &rng, &grads);
      check_loss(batch_loss, epoch, steps + 1);
      scale(grads, 1.0 / static_cast<double>(end - begin));
      adam.step(model, grads);
      ++steps;
      check_finite(model, epoch, steps);
      epoch_loss += batch_loss;
      seen += end - begin;
      if (config.max_steps && steps >= config.max_steps) {
        out_of_steps = true;
        break;
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = seen ? epoch_loss / static_cast<double>(seen) : 0.0;
    rec.valid_loss = mlm_loss(valid, vocab, model, config, config.seed ^ kValidSeedSalt, streams);
    rec.valid_metric = rec.valid_loss;
    rec.steps = steps;
    check_loss(rec.valid_loss, epoch, steps);
    result.history.push_back(rec);
    if (stopper.update(rec.valid_loss)) {
      result.best = model;
      result.best_epoch = epoch;
    }
    if (stopper.should_stop()) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

json to_json(const TrainResult& result, const TrainConfig& config) {
  json epochs = json::array();
  for (const auto& e : result.history) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"valid_loss", e.valid_loss},
                      {"valid_metric", e.valid_metric},
                      {"steps", e.steps}});
  }
  return {{"config",
           {{"lr", config.lr},
            {"batch_size", config.batch_size},
            {"max_epochs", config.max_epochs},
            {"max_steps", config.max_steps},
            {"patience", config.patience},
            {"mlm_prob", config.mlm_prob},
            {"seed", config.seed},
            {"frozen_encoder", config.frozen_encoder}}},
          {"epochs", std::move(epochs)},
          {"best_epoch", result.best_epoch},
          {"stopped_early", result.stopped_early}};
}

// ---------------------------------------------------------------------------
// Finetuning

SketchInput build_cross_encoder_input(const TableSketch& a, const TableSketch& b, const Vocabulary& vocab,
                                      const EncoderConfig& config, const SketchStreams& streams) {
  return assemble_pair_input(a, b, vocab, config, streams);
}

void check_labels(std::span<const PairExample> examples, TaskKind task) {
  std::size_t bits = 0;
  for (const auto& ex : examples) {
    switch (task) {
      case TaskKind::Binary:
        if (!std::holds_alternative<int>(ex.label) || (std::get<int>(ex.label) != 0 && std::get<int>(ex.label) != 1)) {
          throw InvalidArgument("binary task expects class labels 0 or 1");
        }
        break;
      case TaskKind::Regression:
        if (!std::holds_alternative<double>(ex.label)) throw InvalidArgument("regression task expects real labels");
        break;
      case TaskKind::Multilabel: {
        const auto* v = std::get_if<std::vector<std::uint8_t>>(&ex.label);
        if (!v || v->empty()) throw InvalidArgument("multilabel task expects non-empty bit vectors");
        if (bits && v->size() != bits) throw InvalidArgument("multilabel bit vectors differ in length");
        bits = v->size();
        break;
      }
      case TaskKind::Mlm: throw InvalidArgument("mlm is not a pair task");
    }
  }
}

namespace {

struct PairLoss {
  double loss;
  Matrix d_logits;
};

PairLoss pair_loss(const Matrix& logits, TaskKind task, const PairLabel& label) {
  switch (task) {
    case TaskKind::Binary: {
      const int y = std::get<int>(label);
      auto r = cross_entropy(logits, std::span<const int>(&y, 1));
      return {r.loss, std::move(r.grad)};
    }
    case TaskKind::Regression: {
      const double y = std::get<double>(label);
      auto r = mse(logits, std::span<const double>(&y, 1));
      return {r.loss, std::move(r.grad)};
    }
    case TaskKind::Multilabel: {
      const auto& bits = std::get<std::vector<std::uint8_t>>(label);
      Matrix t(1, static_cast<Eigen::Index>(bits.size()));
      for (std::size_t i = 0; i < bits.size(); ++i) t(0, static_cast<Eigen::Index>(i)) = bits[i] ? 1.0 : 0.0;
      auto r = bce_with_logits(logits, t);
      return {r.loss, std::move(r.grad)};
    }
    case TaskKind::Mlm: break;
  }
  throw InvalidArgument("mlm is not a pair task");
}

void ensure_head(EncoderModel& model, TaskKind task, std::span<const PairExample> examples) {
  std::size_t outputs = 0;
  if (task == TaskKind::Multilabel && !examples.empty()) {
    outputs = std::get<std::vector<std::uint8_t>>(examples.front().label).size();
  }
  if (!model.has_head(task) || (task == TaskKind::Multilabel && model.head(task).outputs() != outputs)) {
    model.add_head(task, outputs);
  }
}

}  // namespace

Matrix predict_pair(const EncoderModel& model, TaskKind task, const SketchInput& input) {
  return head_forward(model, task, forward(input, model).pooled);
}

double pair_score(const EncoderModel& model, TaskKind task, const SketchInput& input) {
  const Matrix logits = predict_pair(model, task, input);
  switch (task) {
    case TaskKind::Binary: {
      const double m = logits.maxCoeff();
      const double e0 = std::exp(logits(0, 0) - m), e1 = std::exp(logits(0, 1) - m);
      return e1 / (e0 + e1);
    }
    case TaskKind::Regression: return logits(0, 0);
    case TaskKind::Multilabel: return (1.0 / (1.0 + (-logits.array()).exp())).mean();
    case TaskKind::Mlm: break;
  }
  throw InvalidArgument("mlm is not a pair task");
}

Evaluation evaluate_pairs(std::span<const PairExample> examples, const Vocabulary& vocab,
                          const EncoderModel& model, TaskKind task, const SketchStreams& streams) {
  check_labels(examples, task);
  Evaluation ev;
  if (examples.empty()) return ev;
  std::vector<int> truth;
  std::vector<double> targets;
  for (const auto& ex : examples) {
    const auto logits = predict_pair(model, task,
                                     build_cross_encoder_input(ex.table_a, ex.table_b, vocab, model.config(), streams));
    ev.loss += pair_loss(logits, task, ex.label).loss;
    switch (task) {
      case TaskKind::Binary:
        ev.predicted_classes.push_back(logits(0, 1) > logits(0, 0) ? 1 : 0);
        truth.push_back(std::get<int>(ex.label));
        break;
      case TaskKind::Regression:
        ev.predicted_values.push_back(logits(0, 0));
        targets.push_back(std::get<double>(ex.label));
        break;
      case TaskKind::Multilabel: {
        const auto& bits = std::get<std::vector<std::uint8_t>>(ex.label);
        for (std::size_t i = 0; i < bits.size(); ++i) {
          ev.predicted_classes.push_back(logits(0, static_cast<Eigen::Index>(i)) > 0.0 ? 1 : 0);
          truth.push_back(bits[i] ? 1 : 0);
        }
        break;
      }
      case TaskKind::Mlm: break;
    }
  }
  ev.loss /= static_cast<double>(examples.size());
  if (task == TaskKind::Regression) {
    bool constant = std::all_of(targets.begin(), targets.end(), [&](double t) { return t == targets.front(); });
    ev.metric = targets.size() < 2 || constant ? 0.0 : r2_score(ev.predicted_values, targets);
  } else {
    ev.metric = weighted_f1(ev.predicted_classes, truth);
  }
  return ev;
}

TrainResult finetune(std::span<const PairExample> train, std::span<const PairExample> valid,
                     const Vocabulary& vocab, EncoderModel model, TaskKind task, const TrainConfig& config,
                     const SketchStreams& streams) {
  config.validate();
  if (task == TaskKind::Mlm) throw InvalidArgument("finetuning needs a pair task, not mlm");
  if (train.empty()) throw InvalidArgument("finetuning set is empty");
  if (valid.empty()) throw InvalidArgument("finetuning needs a validation split");
  check_labels(train, task);
  check_labels(valid, task);
  ensure_head(model, task, train);

  std::vector<SketchInput> inputs;
  inputs.reserve(train.size());
  for (const auto& ex : train) {
    inputs.push_back(build_cross_encoder_input(ex.table_a, ex.table_b, vocab, model.config(), streams));
  }

  Rng rng(config.seed);
  Adam adam(model, config.lr, update_filter(config));
  EarlyStopping stopper(config.patience);
  EncoderModel grads = model.zeros_like();
  TrainResult result;
  result.best = model;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t steps = 0;
  bool out_of_steps = false;

  for (std::size_t epoch = 1; epoch <= config.max_epochs && !out_of_steps; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const auto end = std::min(begin + config.batch_size, order.size());
      set_zero(grads);
      double batch_loss = 0.0;
      for (auto i = begin; i < end; ++i) {
        const auto& input = inputs[order[i]];
        ForwardCache cache;
        auto out = forward(input, model, true, &rng, &cache);
        HeadCache head_cache;
        auto logits = head_forward(model, task, out.pooled, true, &rng, &head_cache);
        auto loss = pair_loss(logits, task, train[order[i]].label);
        batch_loss += loss.loss;
        Matrix d_pooled = head_backward(model, task, head_cache, loss.d_logits, grads);
        if (!config.frozen_encoder) backward(input, model, cache, Matrix(), d_pooled, grads);
      }
      check_loss(batch_loss, epoch, steps + 1);
      scale(grads, 1.0 / static_cast<double>(end - begin));
      adam.step(model, grads);
      ++steps;
      check_finite(model, epoch, steps);
      epoch_loss += batch_loss;
      seen += end - begin;
      if (config.max_steps && steps >= config.max_steps) {
        out_of_steps = true;
        break;
      }
    }
    const auto ev = evaluate_pairs(valid, vocab, model, task, streams);
    check_loss(ev.loss, epoch, steps);
    EpochRecord rec{epoch, seen ? epoch_loss / static_cast<double>(seen) : 0.0, ev.loss, ev.metric, steps};
    result.history.push_back(rec);
    if (stopper.update(ev.loss)) {
      result.best = model;
      result.best_epoch = epoch;
    }
    if (stopper.should_stop()) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sketch ablation

namespace {

bool* stream_flag(SketchStreams& s, std::string_view family) {
  if (family == "minhash") return &s.minhash;
  if (family == "numerical") return &s.numerical;
  if (family == "snapshot") return &s.snapshot;
  throw InvalidArgument("unknown sketch family '" + std::string(family) + "' (minhash, numerical, snapshot)");
}

}  // namespace

SketchStreams only_stream(std::string_view family) {
  SketchStreams s{false, false, false};
  *stream_flag(s, family) = true;
  return s;
}

SketchStreams without_stream(std::string_view family) {
  SketchStreams s;
  *stream_flag(s, family) = false;
  return s;
}

std::vector<AblationRow> ablate_sketches(std::span<const PairExample> train, std::span<const PairExample> valid,
                                         const Vocabulary& vocab, const EncoderModel& model, TaskKind task,
                                         const TrainConfig& config) {
  const auto run = [&](const SketchStreams& streams) {
    auto result = finetune(train, valid, vocab, model, task, config, streams);
    return evaluate_pairs(valid, vocab, result.best, task, streams).metric;
  };
  std::vector<AblationRow> out;
  for (auto family : kSketchFamilies) {
    out.push_back({std::string(family), run(only_stream(family)), run(without_stream(family))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Data utilities

AugmentedTables augment_column_orders(const Table& table, std::size_t n, Rng& rng) {
  if (n < 1) throw InvalidArgument("augment_column_orders needs n >= 1");
  const auto c = table.columns.size();
  // Number of distinct orders, saturated at n.
  std::size_t distinct = 1;
  for (std::size_t i = 2; i <= c && distinct < n; ++i) distinct *= i;

  AugmentedTables out;
  std::set<std::vector<std::size_t>> used;
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      do {
        std::shuffle(order.begin(), order.end(), rng);
      } while (used.size() < distinct && used.count(order));
    }
    if (!used.insert(order).second) out.has_duplicates = true;
    out.tables.push_back(select_columns(table, order, i == 0 ? table.id : table.id + "~" + std::to_string(i)));
  }
  return out;
}

std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k-fold needs k >= 2");
  if (k > n) throw InvalidArgument("k-fold needs at least k items");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    const auto begin = f * n / k, end = (f + 1) * n / k;
    for (std::size_t i = 0; i < n; ++i) {
      (i >= begin && i < end ? folds[f].valid : folds[f].train).push_back(idx[i]);
    }
  }
  return folds;
}

TaskKind task_kind_for(std::string_view task) {
  auto ends_with = [&](std::string_view suffix) {
    return task.size() >= suffix.size() && task.substr(task.size() - suffix.size()) == suffix;
  };
  if (ends_with("binary")) return TaskKind::Binary;
  if (ends_with("regression")) return TaskKind::Regression;
  if (ends_with("multilabel")) return TaskKind::Multilabel;
  throw InvalidArgument("unknown task '" + std::string(task) + "'");
}

PairLabel parse_label(const json& label, TaskKind kind) {
  switch (kind) {
    case TaskKind::Binary:
      if (label.is_boolean()) return label.get<bool>() ? 1 : 0;
      if (label.is_number_integer()) return label.get<int>();
      break;
    case TaskKind::Regression:
      if (label.is_number()) return label.get<double>();
      break;
    case TaskKind::Multilabel:
      if (label.is_array()) {
        std::vector<std::uint8_t> bits;
        for (const auto& b : label) bits.push_back(b.get<int>() != 0 ? 1 : 0);
        return bits;
      }
      break;
    case TaskKind::Mlm: break;
  }
  throw FormatError("label " + label.dump() + " does not fit task " + std::string(to_string(kind)));
}

std::vector<ManifestRecord> read_pair_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const auto dir = path.parent_path();
  std::vector<ManifestRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (!j.is_object()) throw FormatError(where + ": record is not an object");
    if (j.value("header", false)) continue;
    for (const char* key : {"table_a_path", "table_b_path", "task", "label"}) {
      if (!j.contains(key)) throw FormatError(where + ": missing '" + key + "'");
    }
    if (!j["table_a_path"].is_string() || !j["table_b_path"].is_string() || !j["task"].is_string()) {
      throw FormatError(where + ": paths and task must be strings");
    }
    ManifestRecord r;
    r.table_a_path = j["table_a_path"].get<std::string>();
    r.table_b_path = j["table_b_path"].get<std::string>();
    if (r.table_a_path.is_relative()) r.table_a_path = dir / r.table_a_path;
    if (r.table_b_path.is_relative()) r.table_b_path = dir / r.table_b_path;
    r.task = j["task"].get<std::string>();
    r.label = j["label"];
    try {
      parse_label(r.label, task_kind_for(r.task));
    } catch (const Error& e) {
      throw FormatError(where + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace lakesketch
