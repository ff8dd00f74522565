#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace lakesketch {

/// query id -> relevant table ids (never containing the query itself).
using GroundTruth = std::map<std::string, std::set<std::string>>;
/// query id -> ranked table ids.
using RankedLists = std::map<std::string, std::vector<std::string>>;

double precision_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                      std::size_t k);
/// 0 when `relevant` is empty.
double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                   std::size_t k);
double f1_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, std::size_t k);

/// Per-class F1 averaged with weights proportional to class support.
double weighted_f1(std::span<const int> predictions, std::span<const int> labels);
double macro_f1(std::span<const int> predictions, std::span<const int> labels);

/// 1 - SS_res / SS_tot. Throws for fewer than 2 targets or constant targets.
double r2_score(std::span<const double> predictions, std::span<const double> targets);

double mean_f1(std::span<const double> per_query);

struct MetricRecord {
  std::string metric;  // "P", "R" or "F1"
  std::size_t k = 0;
  double value = 0.0;
  std::size_t n_queries = 0;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

/// Averages P@k, R@k and F1@k over every query of the ground truth. A query
/// missing from `results` counts as an empty list.
std::vector<MetricRecord> evaluate_retrieval(const RankedLists& results, const GroundTruth& truth,
                                             std::span<const std::size_t> ks);

nlohmann::json to_json(std::span<const MetricRecord> records);
/// `metric,k,value,n_queries` rows for plotting P@k / R@k curves.
std::string metrics_csv(std::span<const MetricRecord> records);

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const nlohmann::json& json);
GroundTruth load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);

}  // namespace lakesketch
