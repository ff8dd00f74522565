#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "lakesketch/encoder.hpp"
#include "lakesketch/sketch.hpp"
#include "lakesketch/table.hpp"

namespace lakesketch::testing {

struct GradCheckInstance {
  EncoderModel model;
  SketchInput input;
  Matrix hidden_weights;  // L x H
  Matrix pooled_weights;  // 1 x H
  Matrix logit_weights;   // 1 x 2
  std::vector<std::uint8_t> key_mask;
};

/// Small model plus a 6-token input: [CLS] desc [SEP] name words [SEP].
inline GradCheckInstance make_gradcheck_instance(std::uint64_t seed, bool mlp_mode = false) {
  std::mt19937_64 rng(seed);
  EncoderConfig cfg;
  cfg.hidden = 16;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.ffn = 24;
  cfg.vocab_size = 12;
  cfg.max_seq_len = 8;
  cfg.max_columns = 3;
  cfg.num_perm = 8;
  cfg.dropout = 0.1;
  cfg.init_seed = seed;
  cfg.mlp_mode = mlp_mode;

  GradCheckInstance g;
  g.model = EncoderModel(cfg);
  g.model.add_head(TaskKind::Binary);
  // Larger weights than the 0.02 init so every path carries signal.
  std::normal_distribution<double> n(0.0, 0.3);
  g.model.for_each_parameter([&](const std::string& name, Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = (name.find("gamma") != std::string::npos ? 1.0 : 0.0) + n(rng);
    }
  });

  const auto L = 6;
  auto& in = g.input;
  in.text.token_ids = {kClsId, 7, kSepId, 9, 5, kSepId};
  in.text.token_positions = {0, 1, 2, 0, 1, 2};
  in.text.column_positions = {0, 0, 0, 1, 1, 1};
  in.text.column_types = {0, 0, 0, 1, 1, 1};
  in.segments = {0, 0, 0, 0, 1, 1};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  in.minhash = Matrix(L, 2 * cfg.num_perm);
  for (Eigen::Index i = 0; i < in.minhash.size(); ++i) in.minhash.data()[i] = u(rng);
  in.numerical = Matrix(L, kNumericalSketchSize);
  for (Eigen::Index i = 0; i < in.numerical.size(); ++i) in.numerical.data()[i] = (u(rng) - 0.5) * 20.0;

  g.hidden_weights = Matrix(L, cfg.hidden);
  for (Eigen::Index i = 0; i < g.hidden_weights.size(); ++i) g.hidden_weights.data()[i] = n(rng);
  g.pooled_weights = Matrix(1, cfg.hidden);
  for (Eigen::Index i = 0; i < g.pooled_weights.size(); ++i) g.pooled_weights.data()[i] = n(rng);
  g.logit_weights = Matrix(1, 2);
  g.logit_weights << n(rng), n(rng);
  if (seed % 2 == 1) g.key_mask = {1, 1, 1, 1, 1, 0};
  return g;
}

inline double gradcheck_loss(const GradCheckInstance& g, const EncoderModel& model) {
  auto out = forward(g.input, model, false, nullptr, nullptr, g.key_mask);
  auto logits = head_forward(model, TaskKind::Binary, out.pooled);
  return (out.hidden.array() * g.hidden_weights.array()).sum() +
         (out.pooled.array() * g.pooled_weights.array()).sum() +
         (logits.array() * g.logit_weights.array()).sum();
}

inline EncoderModel gradcheck_analytic(const GradCheckInstance& g) {
  ForwardCache cache;
  auto out = forward(g.input, g.model, false, nullptr, &cache, g.key_mask);
  HeadCache head_cache;
  head_forward(g.model, TaskKind::Binary, out.pooled, false, nullptr, &head_cache);
  auto grads = g.model.zeros_like();
  Matrix d_pooled = g.pooled_weights;
  d_pooled += head_backward(g.model, TaskKind::Binary, head_cache, g.logit_weights, grads);
  backward(g.input, g.model, cache, g.hidden_weights, d_pooled, grads);
  return grads;
}

/// Max relative error per parameter block, central differences with step eps.
/// Relative error is |a - n| / max(|a| + |n|, floor). The floor matters for
/// entries whose true gradient is zero, e.g. the attention key bias, which
/// shifts every score in a softmax row equally.
inline std::map<std::string, double> gradcheck(const GradCheckInstance& g, double eps = 1e-5,
                                               double floor = 1e-5) {
  const auto analytic = gradcheck_analytic(g);
  std::map<std::string, const Matrix*> by_name;
  analytic.for_each_parameter([&](const std::string& name, const Matrix& m) { by_name[name] = &m; });

  std::map<std::string, double> worst;
  EncoderModel probe = g.model;
  probe.for_each_parameter([&](const std::string& name, Matrix& m) {
    double w = 0.0;
    const Matrix& a = *by_name.at(name);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      m.data()[i] = saved + eps;
      const double up = gradcheck_loss(g, probe);
      m.data()[i] = saved - eps;
      const double down = gradcheck_loss(g, probe);
      m.data()[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double an = a.data()[i];
      w = std::max(w, std::abs(an - numeric) / std::max(std::abs(an) + std::abs(numeric), floor));
    }
    worst[name] = w;
  });
  return worst;
}

}  // namespace lakesketch::testing
