#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace lakesketch::cli {

struct SketchOptions {
  fs::path corpus;
  fs::path out;
};

struct PretrainOptions {
  fs::path sketches;
  fs::path out;
  double valid_fraction = 0.1;
};

struct FinetuneOptions {
  fs::path manifest;
  fs::path out;
  std::optional<fs::path> init;
  double valid_fraction = 0.2;
  std::size_t folds = 0;
};

struct IndexOptions {
  fs::path tables;
  fs::path model;
  fs::path out;
  std::optional<fs::path> value_embeddings;
  std::size_t lsh_trees = 8;
};

struct SearchOptions {
  fs::path index;
  fs::path out;
  std::string mode = "union";
  std::optional<fs::path> queries;
  std::size_t k = 10;
  int query_column = 1;
};

struct RerankOptions {
  fs::path results;
  fs::path out;
  std::string scorer = "jaccard";
  std::optional<fs::path> ground_truth;
  std::optional<fs::path> tables;
  std::optional<fs::path> queries;
  std::optional<fs::path> model;
  std::size_t k = 10;
  std::size_t n_retrieve = 100;
};

struct BenchgenOptions {
  fs::path sources;
  fs::path out;
  std::string kind = "join";
  std::string preset = "subset";
};

struct EvalOptions {
  fs::path results;
  fs::path ground_truth;
  fs::path out;
  std::vector<std::size_t> ks{1, 5, 10};
};

struct AblateOptions {
  fs::path manifest;
  fs::path out;
  std::optional<fs::path> init;
  double valid_fraction = 0.2;
};

void cmd_sketch(const Common& common, const SketchOptions& options);
void cmd_pretrain(const Common& common, const PretrainOptions& options);
void cmd_finetune(const Common& common, const FinetuneOptions& options);
void cmd_index(const Common& common, const IndexOptions& options);
void cmd_search(const Common& common, const SearchOptions& options);
void cmd_rerank(const Common& common, const RerankOptions& options);
void cmd_benchgen(const Common& common, const BenchgenOptions& options);
void cmd_eval(const Common& common, const EvalOptions& options);
void cmd_ablate(const Common& common, const AblateOptions& options);

}  // namespace lakesketch::cli
