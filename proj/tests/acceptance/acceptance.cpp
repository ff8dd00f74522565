// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).
//
// Usage: acceptance [--cli PATH] [criterion ids...]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bench_audit.hpp"
#include "gradcheck.hpp"
#include "json.hpp"
#include "lakesketch/benchgen.hpp"
#include "lakesketch/errors.hpp"
#include "lakesketch/search.hpp"
#include "lakesketch/training.hpp"
#include "ranking_oracle.hpp"
#include "support.hpp"

using namespace lakesketch;
using namespace lakesketch::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string g_cli;

bool bits_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data(), [](double x, double y) {
           return std::memcmp(&x, &y, sizeof x) == 0;
         });
}

bool same_input(const SketchInput& a, const SketchInput& b) {
  return a.text.token_ids == b.text.token_ids && a.text.token_positions == b.text.token_positions &&
         a.text.column_positions == b.text.column_positions && a.text.column_types == b.text.column_types &&
         a.segments == b.segments && bits_equal(a.minhash, b.minhash) && bits_equal(a.numerical, b.numerical);
}

Vocabulary vocab_for(const std::vector<Table>& tables) { return build_vocab(std::span<const Table>(tables)); }

// ---------------------------------------------------------------------------
// 1. MinHash accuracy

Outcome minhash_accuracy() {
  constexpr std::size_t kPairs = 200, kPerm = 256;
  constexpr double kMeanTol = 0.05, kMaxTol = 0.20;
  std::mt19937_64 rng(101);
  struct Pair {
    std::vector<std::string> a, b;
    double exact;
  };
  std::vector<Pair> pairs;
  std::uint64_t next_item = 0;
  for (std::size_t p = 0; p < kPairs; ++p) {
    const std::size_t na = 20 + rng() % 381, nb = 20 + rng() % 381;
    const std::size_t common = rng() % (std::min(na, nb) + 1);
    Pair pr;
    for (std::size_t i = 0; i < common; ++i) {
      auto s = "e" + std::to_string(next_item++);
      pr.a.push_back(s);
      pr.b.push_back(s);
    }
    for (std::size_t i = common; i < na; ++i) pr.a.push_back("e" + std::to_string(next_item++));
    for (std::size_t i = common; i < nb; ++i) pr.b.push_back("e" + std::to_string(next_item++));
    // Exact Jaccard from the sets themselves.
    std::set<std::string> sa(pr.a.begin(), pr.a.end()), sb(pr.b.begin(), pr.b.end()), uni = sa;
    uni.insert(sb.begin(), sb.end());
    std::size_t inter = 0;
    for (const auto& x : sa) inter += sb.count(x);
    pr.exact = static_cast<double>(inter) / static_cast<double>(uni.size());
    pairs.push_back(std::move(pr));
  }
  const HashKind kinds[] = {HashKind::SplitMix, HashKind::Fnv1a, HashKind::MurmurLike, HashKind::ShaFold,
                            HashKind::XorMult};
  const std::uint64_t seeds[] = {1, 2, 3, 42, 20240101};
  double worst_mean = 0.0, worst_max = 0.0;
  std::string worst;
  bool ok = true;
  for (auto kind : kinds) {
    for (auto seed : seeds) {
      const HashFamily family{kind, seed};
      double sum = 0.0, mx = 0.0;
      for (const auto& p : pairs) {
        const double err = std::abs(
            jaccard_estimate(minhash(std::span<const std::string>(p.a), kPerm, family),
                             minhash(std::span<const std::string>(p.b), kPerm, family)) -
            p.exact);
        sum += err;
        mx = std::max(mx, err);
      }
      const double mean = sum / kPairs;
      if (mean > kMeanTol || mx > kMaxTol) ok = false;
      if (mean > worst_mean) {
        worst_mean = mean;
        worst = std::string(to_string(kind)) + "/" + std::to_string(seed);
      }
      worst_max = std::max(worst_max, mx);
    }
  }
  return {ok, fmt("25 family/seed combos; worst mean |err| %.4f (%s, tol %.2f), worst max %.4f (tol %.2f)",
                  worst_mean, worst.c_str(), kMeanTol, worst_max, kMaxTol)};
}

// ---------------------------------------------------------------------------
// 2. Numerical sketch oracle

// Days since 1970-01-01 for a proleptic Gregorian date.
long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

std::array<double, 16> oracle_numerical(const std::vector<std::string>& cells, int kind) {
  std::array<double, 16> out{};
  std::set<std::string> distinct;
  std::size_t nulls = 0;
  std::vector<long double> xs;
  for (const auto& c : cells) {
    if (c.empty()) {
      ++nulls;
      continue;
    }
    distinct.insert(c);
    if (kind == 2) {
      const long long y = std::stoll(c.substr(0, 4));
      const unsigned m = static_cast<unsigned>(std::stoul(c.substr(5, 2)));
      const unsigned d = static_cast<unsigned>(std::stoul(c.substr(8, 2)));
      xs.push_back(static_cast<long double>(days_from_civil(y, m, d) * 86400LL));
    } else {
      xs.push_back(std::strtold(c.c_str(), nullptr));
    }
  }
  const double rows = static_cast<double>(cells.size());
  out[0] = static_cast<double>(distinct.size()) / rows;
  out[1] = static_cast<double>(nulls) / rows;
  out[2] = 0.0;  // cell width is recorded for string columns only
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  // Hyndman-Fan type 7: h = (n - 1) p + 1 on 1-based ranks.
  for (int p = 1; p <= 9; ++p) {
    const long double h = static_cast<long double>(n - 1) * p / 10.0L + 1.0L;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const long double x_lo = xs[lo - 1];
    const long double x_hi = lo < n ? xs[lo] : xs[n - 1];
    out[2 + p] = static_cast<double>(x_lo + (h - lo) * (x_hi - x_lo));
  }
  long double sum = 0;
  for (auto x : xs) sum += x;
  const long double mean = sum / n;
  long double ss = 0;
  for (auto x : xs) ss += (x - mean) * (x - mean);
  out[12] = static_cast<double>(mean);
  out[13] = static_cast<double>(std::sqrt(ss / n));
  out[14] = static_cast<double>(xs.front());
  out[15] = static_cast<double>(xs.back());
  return out;
}

Outcome numerical_oracle() {
  constexpr double kTol = 1e-9;  // relative to max(1, |oracle|)
  std::mt19937_64 rng(202);
  double worst = 0.0;
  std::size_t mismatches = 0, monotone_failures = 0, type_failures = 0;
  for (int c = 0; c < 100; ++c) {
    const int kind = c % 3;  // 0 integer, 1 float, 2 date
    const std::size_t rows = 1 + rng() % 200;
    const bool repeats = rng() % 2 == 0;
    std::vector<std::string> cells;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r > 0 && rng() % 10 == 0) {
        cells.emplace_back();
        continue;
      }
      const auto draw = repeats ? rng() % 7 : rng();
      char buf[32];
      if (kind == 0) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(draw % 200001) - 100000);
      } else if (kind == 1) {
        std::snprintf(buf, sizeof buf, "%.4f", (static_cast<double>(draw % 2000001) - 1000000.0) / 97.0);
      } else {
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", static_cast<int>(1950 + draw % 80),
                      static_cast<int>(1 + (draw / 80) % 12), static_cast<int>(1 + (draw / 960) % 28));
      }
      cells.emplace_back(buf);
    }
    std::vector<std::vector<std::string>> table_rows;
    for (const auto& cell : cells) table_rows.push_back({cell});
    const auto t = make_table("n" + std::to_string(c), {"v"}, table_rows);
    const ColumnType want[] = {ColumnType::Integer, ColumnType::Float, ColumnType::Date};
    if (t.columns[0].type != want[kind]) {
      ++type_failures;
      continue;
    }
    const auto got = numerical_sketch(t.columns[0], t.row_count);
    const auto ref = oracle_numerical(cells, kind);
    for (std::size_t i = 0; i < 16; ++i) {
      const double err = std::abs(got[i] - ref[i]) / std::max(1.0, std::abs(ref[i]));
      worst = std::max(worst, err);
      if (!(err <= kTol)) ++mismatches;
    }
    if (!(got[kMin] <= got[kP10])) ++monotone_failures;
    for (std::size_t p = kP10; p < kP10 + 8; ++p) {
      if (!(got[p] <= got[p + 1])) ++monotone_failures;
    }
    if (!(got[kP10 + 8] <= got[kMax])) ++monotone_failures;
  }
  return {mismatches == 0 && monotone_failures == 0 && type_failures == 0,
          fmt("100 columns; %zu slot mismatches (worst rel err %.2e, tol %.0e), %zu monotonicity violations, "
              "%zu type-inference misses",
              mismatches, worst, kTol, monotone_failures, type_failures)};
}

// ---------------------------------------------------------------------------
// 3. Row-order invariance

Outcome row_order_invariance() {
  std::mt19937_64 rng(303);
  std::vector<Table> tables;
  for (int i = 0; i < 50; ++i) {
    tables.push_back(random_table(rng, "r" + std::to_string(i), 2 + rng() % 60, 1 + rng() % 8));
  }
  const auto vocab = vocab_for(tables);
  EncoderConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.init_seed = 3;
  const EncoderModel model(cfg);
  std::size_t sketch_diff = 0, input_diff = 0, embed_diff = 0;
  for (const auto& t : tables) {
    std::vector<std::size_t> perm(t.row_count);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto shuffled = select_rows(t, perm, t.id);
    const auto s1 = sketch_table(t), s2 = sketch_table(shuffled);
    if (!(s1 == s2)) ++sketch_diff;
    const auto in1 = assemble_input(s1, vocab, cfg), in2 = assemble_input(s2, vocab, cfg);
    if (!same_input(in1, in2)) ++input_diff;
    const auto o1 = forward(in1, model), o2 = forward(in2, model);
    const auto e1 = embed_sketch(s1, model, vocab), e2 = embed_sketch(s2, model, vocab);
    bool same = bits_equal(o1.hidden, o2.hidden) && bits_equal(o1.pooled, o2.pooled) &&
                e1.table.size() == e2.table.size() && e1.columns.size() == e2.columns.size() &&
                std::memcmp(e1.table.data(), e2.table.data(), sizeof(double) * e1.table.size()) == 0;
    for (std::size_t c = 0; same && c < e1.columns.size(); ++c) {
      same = std::memcmp(e1.columns[c].data(), e2.columns[c].data(), sizeof(double) * e1.columns[c].size()) == 0;
    }
    if (!same) ++embed_diff;
  }
  return {sketch_diff + input_diff + embed_diff == 0,
          fmt("50 tables; differing sketches %zu, inputs %zu, embeddings %zu (bitwise)", sketch_diff, input_diff,
              embed_diff)};
}

// ---------------------------------------------------------------------------
// 4. Gradient correctness

Outcome gradient_check() {
  constexpr double kTol = 1e-4, kEps = 1e-5;
  double worst = 0.0;
  std::string worst_block;
  std::size_t blocks = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto g = make_gradcheck_instance(seed);
    if (g.input.size() != 6 || g.model.config().hidden != 16 || g.model.config().layers != 1) {
      return {false, "gradcheck instance does not have the required shape"};
    }
    const auto errs = gradcheck(g, kEps);
    blocks = errs.size();
    for (const auto& [name, err] : errs) {
      const double e = std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
      if (e > worst) {
        worst = e;
        worst_block = name;
      }
    }
  }
  return {worst <= kTol, fmt("3 instances x %zu parameter blocks; max relative error %.2e in %s (tol %.0e)", blocks,
                             worst, worst_block.c_str(), kTol)};
}

// ---------------------------------------------------------------------------
// 5. Cross-entropy conformance

Outcome cross_entropy_conformance() {
  constexpr double kTol = 1e-10;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto n = static_cast<Eigen::Index>(1 + rng() % 8);
    const auto v = static_cast<Eigen::Index>(2 + rng() % 60);
    Matrix logits(n, v);
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = u(rng);
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(v)));
    // -(1/N) sum_i log( exp(z_i,y) / sum_j exp(z_i,j) ), evaluated literally.
    long double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      long double z = 0;
      for (Eigen::Index j = 0; j < v; ++j) z += std::exp(static_cast<long double>(logits(i, j)));
      total -= std::log(std::exp(static_cast<long double>(logits(i, labels[static_cast<std::size_t>(i)]))) / z);
    }
    const double oracle = static_cast<double>(total / n);
    worst = std::max(worst, std::abs(cross_entropy(logits, labels).loss - oracle));
  }
  std::size_t uniform_checked = 0, uniform_exact = 0;
  for (int v : {2, 3, 5, 7, 10, 64, 100, 1000, 30522}) {
    for (double c : {0.0, 3.7, -12.25}) {
      const Matrix logits = Matrix::Constant(3, v, c);
      const std::vector<int> labels{0, v / 2, v - 1};
      ++uniform_checked;
      if (cross_entropy(logits, labels).loss == std::log(static_cast<double>(v))) ++uniform_exact;
    }
  }
  return {worst <= kTol && uniform_exact == uniform_checked,
          fmt("50 instances, max |loss - oracle| %.2e (tol %.0e); uniform logits equal ln(V) exactly in %zu/%zu",
              worst, kTol, uniform_exact, uniform_checked)};
}

// ---------------------------------------------------------------------------
// 6. Masking rule

Outcome masking_rule() {
  std::mt19937_64 gen(606);
  std::vector<Table> tables;
  for (std::size_t cols = 2; cols <= 12; ++cols) {
    for (int rep = 0; rep < 3; ++rep) {
      tables.push_back(random_table(gen, "m" + std::to_string(cols) + "_" + std::to_string(rep), 12, cols));
    }
  }
  const auto vocab = vocab_for(tables);
  EncoderConfig cfg;
  cfg.vocab_size = vocab.size();
  TrainConfig train;
  train.mlm_prob = 0.15;
  std::size_t count_errors = 0, span_errors = 0, sketch_errors = 0, repeat_errors = 0, examples = 0;
  Rng rng(6);
  for (const auto& t : tables) {
    const auto sketch = sketch_table(t);
    const auto clean = assemble_input(sketch, vocab, cfg);
    const auto ex = make_mlm_examples(sketch, vocab, cfg, train, rng);
    examples += ex.size();
    if (ex.size() != std::min<std::size_t>(t.columns.size(), 5)) ++count_errors;
    std::set<int> chosen;
    for (const auto& e : ex) {
      chosen.insert(e.masked_column);
      if (!bits_equal(e.input.minhash, clean.minhash) || !bits_equal(e.input.numerical, clean.numerical)) {
        ++sketch_errors;
      }
      std::set<std::size_t> labelled;
      for (const auto& [pos, id] : e.labels) {
        labelled.insert(pos);
        if (clean.text.token_ids[pos] != id || e.input.text.token_ids[pos] != kMaskId) ++span_errors;
      }
      int fully_masked = 0;
      for (const auto& span : clean.text.spans) {
        if (span.column == 0) continue;
        std::size_t masked = 0;
        for (auto p = span.name_begin; p < span.name_end; ++p) masked += e.input.text.token_ids[p] == kMaskId;
        const auto len = span.name_end - span.name_begin;
        if (span.column == e.masked_column) {
          if (masked != len || len == 0) ++span_errors;
          for (auto p = span.name_begin; p < span.name_end; ++p) {
            if (!labelled.count(p)) ++span_errors;
          }
          ++fully_masked;
        } else if (masked != 0) {
          ++span_errors;
        }
        // Separators and other structure never change.
        for (auto p = span.name_end; p < span.end; ++p) {
          if (e.input.text.token_ids[p] != clean.text.token_ids[p]) ++span_errors;
        }
      }
      if (fully_masked != 1) ++span_errors;
    }
    if (chosen.size() != ex.size()) ++repeat_errors;
  }
  return {count_errors + span_errors + sketch_errors + repeat_errors == 0,
          fmt("%zu tables with 2-12 columns, %zu examples; count errors %zu, span errors %zu, sketch changes %zu, "
              "repeated columns %zu",
              tables.size(), examples, count_errors, span_errors, sketch_errors, repeat_errors)};
}

// ---------------------------------------------------------------------------
// 7. Overfit and early stopping

Outcome overfit_check() {
  std::mt19937_64 rng(707);
  SketchConfig sk;
  sk.num_perm = 64;
  std::vector<PairExample> pairs;
  std::vector<Table> tables;
  std::size_t positives = 0;
  std::uint64_t next = 0;
  for (int i = 0; i < 50; ++i) {
    const bool high = i % 2 == 0;
    const double target = high ? 0.6 + 0.35 * (rng() % 100) / 100.0 : 0.05 + 0.35 * (rng() % 100) / 100.0;
    const std::size_t size = 40;
    const auto shared = static_cast<std::size_t>(std::llround(2.0 * size * target / (1.0 + target)));
    std::vector<std::vector<std::string>> a, b;
    for (std::size_t k = 0; k < shared; ++k) {
      auto v = "v" + std::to_string(next++);
      a.push_back({v});
      b.push_back({v});
    }
    for (std::size_t k = shared; k < size; ++k) a.push_back({"v" + std::to_string(next++)});
    for (std::size_t k = shared; k < size; ++k) b.push_back({"v" + std::to_string(next++)});
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    auto ta = make_table("a" + std::to_string(i), {"values"}, a);
    auto tb = make_table("b" + std::to_string(i), {"values"}, b);
    const auto ja = join_values(ta), jb = join_values(tb);
    std::size_t inter = 0;
    for (const auto& x : ja) inter += jb.count(x);
    const double exact = static_cast<double>(inter) / static_cast<double>(ja.size() + jb.size() - inter);
    const int label = exact > 0.5 ? 1 : 0;
    positives += static_cast<std::size_t>(label);
    pairs.push_back({sketch_table(ta, sk), sketch_table(tb, sk), label});
    tables.push_back(std::move(ta));
    tables.push_back(std::move(tb));
  }
  const auto vocab = vocab_for(tables);
  EncoderConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.num_perm = sk.num_perm;
  cfg.hidden = 32;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.ffn = 64;
  cfg.dropout = 0.0;
  cfg.init_seed = 7;
  TrainConfig train;
  train.lr = 1e-3;
  train.batch_size = 8;
  train.max_epochs = 200;
  train.patience = 200;
  train.seed = 7;
  // Validation on the training pairs themselves: the metric is training weighted F1.
  const auto result = finetune(pairs, pairs, vocab, EncoderModel(cfg), TaskKind::Binary, train);
  std::size_t first_perfect = 0;
  for (const auto& e : result.history) {
    if (e.valid_metric == 1.0) {
      first_perfect = e.epoch;
      break;
    }
  }
  const auto final_eval = evaluate_pairs(pairs, vocab, result.best, TaskKind::Binary);

  // Plateau: patience 5 stops exactly five epochs after the last improvement.
  EarlyStopping stop(5);
  const double stream[] = {1.0, 0.9, 0.8, 0.8, 0.8, 0.8, 0.8, 0.8, 0.8};
  std::size_t stopped_after = 0;
  for (std::size_t i = 0; i < std::size(stream); ++i) {
    stop.update(stream[i]);
    if (stop.should_stop()) {
      stopped_after = i + 1;
      break;
    }
  }
  TrainConfig frozen = train;
  frozen.lr = 0.0;
  frozen.patience = 5;
  const auto flat = finetune(pairs, pairs, vocab, EncoderModel(cfg), TaskKind::Binary, frozen);
  const bool plateau_ok = stopped_after == 8 && flat.stopped_early && flat.history.size() == 6 && flat.best_epoch == 1;
  return {first_perfect > 0 && final_eval.metric == 1.0 && plateau_ok,
          fmt("50 pairs (%zu positive); training weighted F1 first 1.0 at epoch %zu (limit 200), best-model F1 %.3f; "
              "patience 5 stopped after %zu updates (want 8), flat run stopped at epoch %zu (want 6)",
              positives, first_perfect, final_eval.metric, stopped_after, flat.history.size())};
}

// ---------------------------------------------------------------------------
// 8. Ranking oracle

Vector random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = n(rng);
  return v / v.norm();
}

Outcome ranking_oracle() {
  std::mt19937_64 rng(808);
  std::size_t comparisons = 0, mismatches = 0;
  for (int corpus = 0; corpus < 100; ++corpus) {
    const int n_tables = 2 + static_cast<int>(rng() % 29);
    const int dim = 4 + static_cast<int>(rng() % 6);
    EmbeddingIndex index;
    std::vector<OracleEntry> lake;
    std::vector<std::vector<Vector>> by_table;
    for (int t = 0; t < n_tables; ++t) {
      const auto id = "t" + std::to_string(t);
      std::vector<Vector> cols;
      // Every fifth table copies an earlier one to force exact distance ties.
      if (t > 1 && t % 5 == 0) {
        cols = by_table[rng() % by_table.size()];
      } else {
        const int n_cols = 1 + static_cast<int>(rng() % 6);
        for (int c = 0; c < n_cols; ++c) cols.push_back(random_unit(rng, dim));
      }
      for (std::size_t c = 0; c < cols.size(); ++c) {
        index.add(id, static_cast<int>(c + 1), cols[c]);
        lake.push_back({id, static_cast<int>(c + 1), cols[c]});
      }
      by_table.push_back(cols);
    }
    const std::string qid = "t" + std::to_string(rng() % static_cast<std::uint64_t>(n_tables));
    std::vector<Vector> query;
    for (const auto& e : lake) {
      if (e.table == qid) query.push_back(rng() % 3 == 0 ? Vector(e.v) : Vector(e.v + 0.4 * random_unit(rng, dim)));
    }
    for (std::size_t k : {1u, 2u, 3u, 5u, 10u}) {
      ++comparisons;
      const auto got = near_tables(qid, query, index, k);
      const auto want = oracle_near_tables(qid, query, lake, k);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].table_id == std::get<0>(want[i]) && got[i].matched_columns == std::get<1>(want[i]) &&
               std::abs(got[i].distance_sum - std::get<2>(want[i])) <= 1e-12;
      }
      if (!same) ++mismatches;
    }
  }
  return {mismatches == 0,
          fmt("100 corpora of 2-30 tables, k in {1,2,3,5,10}; %zu/%zu rankings differ from the oracle", mismatches,
              comparisons)};
}

// ---------------------------------------------------------------------------
// 9. Retrieve-and-rerank

Outcome rerank_property() {
  constexpr std::size_t kFamilies = 7, kPerFamily = 8, kPool = 160, kMinKeys = 64, kTop = 100, kK = 10;
  constexpr double kRelevant = 0.5;
  std::mt19937_64 gen(909);
  std::vector<Table> sources;
  for (std::size_t f = 0; f < kFamilies; ++f) {
    for (std::size_t s = 0; s < kPerFamily; ++s) {
      std::vector<std::size_t> pool(kPool);
      std::iota(pool.begin(), pool.end(), 0);
      // Sources of one family draw pool keys at different densities and keep
      // pool order, so same-half quadrants overlap around the relevance cut.
      std::vector<std::size_t> keys;
      std::sample(pool.begin(), pool.end(), std::back_inserter(keys), kMinKeys + gen() % (kPool - kMinKeys), gen);
      std::vector<std::vector<std::string>> rows;
      for (auto k : keys) {
        char key[32];
        std::snprintf(key, sizeof key, "f%zu-k%04zu", f, k);
        rows.push_back({key, std::to_string(gen() % 100000) + ".5", gen() % 2 ? "yes" : "no"});
      }
      sources.push_back(make_table("src" + std::to_string(f) + "_" + std::to_string(s), {"key", "amount", "flag"}, rows));
    }
  }
  const auto bench = generate_benchmark(sources, BenchmarkKind::QuadrantJoin, 9);
  const auto& corpus = bench.tables;
  std::map<std::string, std::vector<std::string>> keys;
  std::map<std::string, std::set<std::string>> key_sets;
  LshForest forest(8);
  for (const auto& t : corpus) {
    keys[t.id] = cell_set(t.columns[0]);
    key_sets[t.id] = join_values(t);
    forest.add(t.id, sketch_column(t.columns[0], t.row_count, SketchConfig{}).cells);
  }
  forest.index();
  auto exact = [&](const std::string& a, const std::string& b) {
    const auto& x = key_sets.at(a);
    const auto& y = key_sets.at(b);
    std::size_t inter = 0;
    for (const auto& v : x) inter += y.count(v);
    return static_cast<double>(inter) / static_cast<double>(x.size() + y.size() - inter);
  };
  std::size_t queries = 0, worse = 0, better_where_imperfect = 0, imperfect = 0;
  double before_sum = 0.0, after_sum = 0.0;
  for (const auto& q : corpus) {
    ++queries;
    std::set<std::string> relevant;
    for (const auto& t : corpus) {
      if (t.id != q.id && exact(q.id, t.id) >= kRelevant) relevant.insert(t.id);
    }
    const auto sig = sketch_column(q.columns[0], q.row_count, SketchConfig{}).cells;
    Retriever retriever = [&](std::size_t n) {
      std::vector<std::string> out;
      for (const auto& [id, score] : forest.query(sig, n + 1)) {
        if (id != q.id && out.size() < n) out.push_back(id);
      }
      return out;
    };
    Scorer scorer = [&](const std::string& c) {
      // Exact Jaccard of the join columns from the raw cells.
      const auto& a = keys.at(q.id);
      const auto& b = keys.at(c);
      std::vector<std::string> inter;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
      return static_cast<double>(inter.size()) / static_cast<double>(a.size() + b.size() - inter.size());
    };
    const auto outcome = retrieve_and_rerank(retriever, scorer, kK, kTop);
    auto p_at_k = [&](auto get, std::size_t n) {
      std::size_t hits = 0;
      for (std::size_t i = 0; i < std::min(n, kK); ++i) hits += relevant.count(get(i));
      return static_cast<double>(hits) / kK;
    };
    const double before = p_at_k([&](std::size_t i) { return outcome.retrieved[i]; }, outcome.retrieved.size());
    const double after = p_at_k([&](std::size_t i) { return outcome.ranked[i].table_id; }, outcome.ranked.size());
    before_sum += before;
    after_sum += after;
    if (after < before) ++worse;
    if (before < 1.0) {
      ++imperfect;
      if (after > before) ++better_where_imperfect;
    }
  }
  return {queries >= 200 && worse == 0 && better_where_imperfect >= 1,
          fmt("%zu queries; mean P@10 %.3f -> %.3f; worse on %zu queries; strictly better on %zu of %zu queries "
              "with stage-one P@10 < 1",
              queries, before_sum / queries, after_sum / queries, worse, better_where_imperfect, imperfect)};
}

// ---------------------------------------------------------------------------
// 10. Benchmark generators

Outcome benchmark_generators() {
  std::mt19937_64 gen(1010);
  std::size_t negatives = 0, overlapping = 0, ckan = 0, ckan_bad = 0, variant_sets = 0, variant_bad = 0;
  std::vector<Table> sources;
  for (int i = 0; i < 60; ++i) {
    auto t = i % 2 ? keyed_table(gen, "k" + std::to_string(i), 40 + gen() % 200, 3 + gen() % 6)
                   : random_table(gen, "r" + std::to_string(i), 8 + gen() % 200, 2 + gen() % 6);
    Rng rng(table_seed(10, t.id));
    if (auto q = gen_quadrant_join(t, rng)) {
      for (const auto& [a, b] : {std::pair{&q->top_left, &q->bottom_right}, std::pair{&q->bottom_left, &q->top_right}}) {
        ++negatives;
        if (!disjoint(join_values(*a), join_values(*b))) ++overlapping;
      }
    }
    if (auto c = gen_ckan_subset(t, rng)) {
      ++ckan;
      if (!contained(c->part, c->positive_right)) ++ckan_bad;
    }
    if (auto v = gen_subset_variants(t, rng)) {
      ++variant_sets;
      bool ok = v->size() == 11;
      for (const auto& x : *v) ok = ok && contained(x.table, t);
      if (!ok) ++variant_bad;
    }
    sources.push_back(std::move(t));
  }
  TempDir dir;
  std::size_t byte_mismatch = 0;
  for (auto kind : {BenchmarkKind::QuadrantJoin, BenchmarkKind::CkanSubset, BenchmarkKind::Variants}) {
    const auto name = std::string(to_string(kind));
    write_benchmark(generate_benchmark(sources, kind, 77), dir / (name + "_1"));
    write_benchmark(generate_benchmark(sources, kind, 77), dir / (name + "_2"));
    if (directory_bytes(dir / (name + "_1")) != directory_bytes(dir / (name + "_2"))) ++byte_mismatch;
  }
  const bool ok = negatives > 0 && overlapping == 0 && ckan > 0 && ckan_bad == 0 && variant_sets > 0 &&
                  variant_bad == 0 && byte_mismatch == 0;
  return {ok, fmt("%zu negative pairs, %zu share join values; %zu CKAN positives, %zu missing S_i; %zu variant sets, "
                  "%zu failing count/containment; %zu of 3 benchmark kinds differ on regeneration",
                  negatives, overlapping, ckan, ckan_bad, variant_sets, variant_bad, byte_mismatch)};
}

// ---------------------------------------------------------------------------
// 11. Near-duplicate scan

Outcome near_duplicate_scan_check() {
  constexpr std::size_t kK = 5;
  constexpr double kFloor = 0.90;
  std::mt19937_64 gen(1111);
  std::vector<Table> sources, everything;
  std::vector<Variant> variants;
  for (int i = 0; i < 100; ++i) {
    // About ten columns and a few hundred rows per source.
    auto t = random_table(gen, "src" + std::to_string(i), 100 + gen() % 201, 6 + gen() % 7);
    Rng rng(table_seed(11, t.id));
    auto v = gen_subset_variants(t, rng, VariantPreset::NearDup);
    if (!v) return {false, "variant generation failed for " + t.id};
    for (auto& x : *v) {
      everything.push_back(x.table);
      variants.push_back(std::move(x));
    }
    everything.push_back(t);
    sources.push_back(std::move(t));
  }
  const auto vocab = vocab_for(everything);
  EncoderConfig cfg;
  cfg.vocab_size = vocab.size();
  cfg.init_seed = 11;
  const EncoderModel model(cfg);  // untrained
  EmbeddingIndex index;
  std::map<std::string, std::string> parent, kind;
  for (const auto& v : variants) {
    index.add(v.table.id, 0, table_embedding(sketch_table(v.table), model, vocab));
    parent[v.table.id] = v.parent;
    kind[v.table.id] = v.kind;
  }
  std::size_t only_variants = 0, row_misses = 0, short_lists = 0, column_hits = 0;
  for (const auto& s : sources) {
    const auto hits = subset_search(s.id, table_embedding(sketch_table(s), model, vocab), index, kK);
    if (hits.size() != kK) ++short_lists;
    bool all_own = true;
    std::size_t rows_found = 0;
    for (const auto& h : hits) {
      all_own = all_own && parent.at(h.table_id) == s.id;
      if (parent.at(h.table_id) != s.id) continue;
      if (kind.at(h.table_id).rfind("del_rows", 0) == 0) ++rows_found;
      else ++column_hits;
    }
    only_variants += all_own;
    row_misses += 4 - rows_found;
  }
  const double frac = static_cast<double>(only_variants) / static_cast<double>(sources.size());
  return {frac >= kFloor && row_misses == 0 && short_lists == 0,
          fmt("100 queries over %zu variants, k=5: %.0f%% return only own variants (floor %.0f%%); "
              "%zu row-deletion variants missed; %zu column-deletion variants in top-5 lists; %zu short lists",
              variants.size(), 100.0 * frac, 100.0 * kFloor, row_misses, column_hits, short_lists)};
}

// ---------------------------------------------------------------------------
// 12. Ablation plumbing

Outcome ablation_plumbing() {
  std::mt19937_64 gen(1212);
  std::vector<Table> tables;
  for (int i = 0; i < 20; ++i) tables.push_back(random_table(gen, "a" + std::to_string(i), 5 + gen() % 30, 1 + gen() % 6));
  const auto vocab = vocab_for(tables);
  EncoderConfig cfg;
  cfg.vocab_size = vocab.size();
  std::size_t structural = 0, leaked = 0, untouched = 0;
  for (const auto& t : tables) {
    const auto s = sketch_table(t);
    const auto full = assemble_input(s, vocab, cfg);
    const auto none = assemble_input(s, vocab, cfg, SketchStreams{false, false, false});
    const auto only_minhash = assemble_input(s, vocab, cfg, only_stream("minhash"));
    for (const auto* x : {&none, &only_minhash}) {
      if (x->text.token_ids != full.text.token_ids || x->text.token_positions != full.text.token_positions ||
          x->text.column_positions != full.text.column_positions ||
          x->text.column_types != full.text.column_types || x->segments != full.segments) {
        ++structural;
      }
    }
    if (!none.minhash.isZero(0.0) || !none.numerical.isZero(0.0)) ++leaked;
    if (full.minhash.isZero(0.0)) ++untouched;
    // Only MinHash: numerical and snapshot slots are zero, column MinHash rows intact.
    if (!only_minhash.numerical.isZero(0.0)) ++leaked;
    for (const auto& span : full.text.spans) {
      for (auto p = span.begin; p < span.end; ++p) {
        const auto row = static_cast<Eigen::Index>(p);
        if (span.column == 0 && !only_minhash.minhash.row(row).isZero(0.0)) ++leaked;
        if (span.column != 0 && only_minhash.minhash.row(row) != full.minhash.row(row)) ++leaked;
      }
    }
  }
  std::string cli_detail = "CLI not run (pass --cli PATH)";
  bool cli_ok = false;
  if (!g_cli.empty()) {
    TempDir dir;
    fs::create_directories(dir / "src");
    std::mt19937_64 g2(12);
    for (int i = 0; i < 6; ++i) write_csv(keyed_table(g2, "s" + std::to_string(i), 40, 4), dir / "src" / ("s" + std::to_string(i) + ".csv"));
    write_file(dir / "cfg.json",
               R"({"sketch":{"num_perm":32},"encoder":{"hidden":16,"layers":1,"heads":2,"ffn":32},)"
               R"("train":{"max_epochs":2}})");
    const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
    const auto quiet = " > " + q(dir / "log.txt") + " 2>&1";
    const int rc1 = std::system((g_cli + " benchgen " + q(dir / "src") + " -o " + q(dir / "bench") + " --kind join" + quiet).c_str());
    const int rc2 = std::system((g_cli + " --seed 5 --config " + q(dir / "cfg.json") + " ablate --manifest " +
                                 q(dir / "bench" / "manifest.jsonl") + " -o " + q(dir / "ab") + quiet)
                                    .c_str());
    std::size_t rows = 0, md_rows = 0;
    bool shape = false;
    if (rc1 == 0 && rc2 == 0 && fs::exists(dir / "ab" / "ablation.json")) {
      std::ifstream in(dir / "ab" / "ablation.json");
      const auto j = nlohmann::json::parse(in);
      const auto& r = j.at("rows");
      rows = r.size();
      shape = rows == 3;
      for (std::size_t i = 0; shape && i < rows; ++i) {
        shape = r[i].at("family") == kSketchFamilies[i];
        for (const char* key : {"only", "without"}) {
          const auto& v = r[i].at(key);
          shape = shape && v.is_number() && std::isfinite(v.get<double>()) && v.get<double>() >= 0.0 &&
                  v.get<double>() <= 1.0;
        }
      }
      std::ifstream md(dir / "ab" / "ablation.md");
      std::string line;
      while (std::getline(md, line)) md_rows += line.rfind("| ", 0) == 0;
    }
    cli_ok = shape && md_rows == 4 && fs::exists(dir / "ab" / "run.json");
    cli_detail = fmt("CLI ablate exit %d/%d, %zu rows x (only, without), markdown rows %zu (want header + 3)", rc1, rc2,
                     rows, md_rows);
  }
  return {structural == 0 && leaked == 0 && untouched == 0 && cli_ok,
          fmt("20 tables: %zu structural changes, %zu non-zero disabled slots, %zu inputs without sketches; ",
              structural, leaked, untouched) +
              cli_detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      g_cli = "'" + std::string(argv[++i]) + "'";
    } else {
      selected.insert(std::stoi(a));
    }
  }
  const std::vector<Criterion> criteria = {
      {1, "MinHash accuracy", 10.0, minhash_accuracy},
      {2, "Numerical sketch oracle", 5.0, numerical_oracle},
      {3, "Row-order invariance", 30.0, row_order_invariance},
      {4, "Gradient correctness", 60.0, gradient_check},
      {5, "Cross-entropy conformance", 0.0, cross_entropy_conformance},
      {6, "Masking rule", 0.0, masking_rule},
      {7, "Overfit check", 300.0, overfit_check},
      {8, "Ranking oracle", 0.0, ranking_oracle},
      {9, "Rerank property", 0.0, rerank_property},
      {10, "Benchmark generators", 0.0, benchmark_generators},
      {11, "Near-duplicate scan", 0.0, near_duplicate_scan_check},
      {12, "Ablation plumbing", 0.0, ablation_plumbing},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      out.pass = false;
      out.detail += fmt("; runtime %.1f s exceeds %.0f s", secs, c.limit_seconds);
    }
    failed += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << " [" << (c.id < 10 ? " " : "") << c.id << "] " << c.name << ": "
              << out.detail << fmt(" (%.2f s)", secs) << std::endl;
  }
  std::cout << (failed ? "FAILED: " : "ALL PASSED: ") << failed << " failing criteria" << std::endl;
  return failed ? 1 : 0;
}
