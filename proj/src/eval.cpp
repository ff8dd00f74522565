#include "lakesketch/eval.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "lakesketch/errors.hpp"

namespace lakesketch {

using nlohmann::json;

namespace {

std::size_t hits_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                      std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be at least 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) hits += relevant.count(ranked[i]);
  return hits;
}

struct ClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0, support = 0;

  double f1() const {
    const auto denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
};

std::map<int, ClassCounts> confusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ShapeError("predictions and labels differ in length");
  if (labels.empty()) throw InvalidArgument("F1 of an empty label set");
  std::map<int, ClassCounts> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++counts[labels[i]].support;
    if (predictions[i] == labels[i]) {
      ++counts[labels[i]].tp;
    } else {
      ++counts[predictions[i]].fp;
      ++counts[labels[i]].fn;
    }
  }
  return counts;
}

}  // namespace

double precision_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                      std::size_t k) {
  return static_cast<double>(hits_at_k(ranked, relevant, k)) / static_cast<double>(k);
}

double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                   std::size_t k) {
  const auto hits = hits_at_k(ranked, relevant, k);
  return relevant.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double f1_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k) {
  const double p = precision_at_k(ranked, relevant, k);
  const double r = recall_at_k(ranked, relevant, k);
  return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
}

double weighted_f1(std::span<const int> predictions, std::span<const int> labels) {
  double total = 0.0;
  for (const auto& [cls, c] : confusion(predictions, labels)) {
    total += c.f1() * static_cast<double>(c.support);
  }
  return total / static_cast<double>(labels.size());
}

double macro_f1(std::span<const int> predictions, std::span<const int> labels) {
  double total = 0.0;
  std::size_t classes = 0;
  for (const auto& [cls, c] : confusion(predictions, labels)) {
    if (c.support == 0) continue;
    total += c.f1();
    ++classes;
  }
  return total / static_cast<double>(classes);
}

double r2_score(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw ShapeError("predictions and targets differ in length");
  if (targets.size() < 2) throw InvalidArgument("R2 needs at least two targets");
  const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    ss_res += (targets[i] - predictions[i]) * (targets[i] - predictions[i]);
    ss_tot += (targets[i] - mean) * (targets[i] - mean);
  }
  if (ss_tot == 0.0) throw InvalidArgument("R2 is undefined for constant targets");
  return 1.0 - ss_res / ss_tot;
}

double mean_f1(std::span<const double> per_query) {
  if (per_query.empty()) throw InvalidArgument("mean F1 of an empty list");
  return std::accumulate(per_query.begin(), per_query.end(), 0.0) / static_cast<double>(per_query.size());
}

std::vector<MetricRecord> evaluate_retrieval(const RankedLists& results, const GroundTruth& truth,
                                             std::span<const std::size_t> ks) {
  std::vector<MetricRecord> out;
  const std::vector<std::string> none;
  for (auto k : ks) {
    double p = 0, r = 0, f = 0;
    for (const auto& [query, relevant] : truth) {
      auto it = results.find(query);
      const auto& ranked = it == results.end() ? none : it->second;
      p += precision_at_k(ranked, relevant, k);
      r += recall_at_k(ranked, relevant, k);
      f += f1_at_k(ranked, relevant, k);
    }
    const auto n = truth.size();
    const double d = n == 0 ? 1.0 : static_cast<double>(n);
    out.push_back({"P", k, p / d, n});
    out.push_back({"R", k, r / d, n});
    out.push_back({"F1", k, f / d, n});
  }
  return out;
}

json to_json(std::span<const MetricRecord> records) {
  json out = json::array();
  for (const auto& r : records) {
    out.push_back({{"metric", r.metric}, {"k", r.k}, {"value", r.value}, {"n_queries", r.n_queries}});
  }
  return out;
}

std::string metrics_csv(std::span<const MetricRecord> records) {
  std::ostringstream out;
  out.precision(17);
  out << "metric,k,value,n_queries\n";
  for (const auto& r : records) out << r.metric << ',' << r.k << ',' << r.value << ',' << r.n_queries << '\n';
  return out.str();
}

json to_json(const GroundTruth& truth) {
  json out = json::object();
  for (const auto& [query, relevant] : truth) out[query] = std::vector<std::string>(relevant.begin(), relevant.end());
  return out;
}

GroundTruth ground_truth_from_json(const json& j) {
  GroundTruth truth;
  for (const auto& [query, relevant] : j.items()) {
    auto& set = truth[query];
    for (const auto& id : relevant) set.insert(id.get<std::string>());
    set.erase(query);
  }
  return truth;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return ground_truth_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw FormatError("invalid ground truth " + path.string() + ": " + e.what());
  }
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(truth).dump(2) << '\n';
}

}  // namespace lakesketch
