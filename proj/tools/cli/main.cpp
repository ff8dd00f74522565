#include <spdlog/spdlog.h>

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "lakesketch/errors.hpp"

using namespace lakesketch;
using namespace lakesketch::cli;

int main(int argc, char** argv) {
  CLI::App app{"Sketch-based table search: sketch, train, index, search and evaluate CSV data lakes.", "lakesketch"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  std::string config_path;
  std::uint64_t seed = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON run config; flags override it")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Global seed (falls back to LAKESKETCH_SEED, then 0)");
  app.add_option("--jobs,-j", common.jobs, "Worker threads (default: available parallelism)");
  app.add_flag("--no-header", common.no_header, "CSV files have no header row");
  app.add_flag("--verbose,-v", common.verbose, "Debug logging");

  SketchOptions sk;
  auto* sketch = app.add_subcommand("sketch", "Sketch every CSV in a directory into .tsk files");
  sketch->add_option("corpus", sk.corpus, "Directory of CSV files")->required()->check(CLI::ExistingDirectory);
  sketch->add_option("--out,-o", sk.out, "Output directory")->required();

  PretrainOptions pt;
  auto* pretrain = app.add_subcommand("pretrain", "Masked column-name pretraining over a corpus");
  pretrain->add_option("--sketches", pt.sketches, "Directory of .tsk or CSV files")->required()->check(CLI::ExistingDirectory);
  pretrain->add_option("--out,-o", pt.out, "Model directory")->required();
  pretrain->add_option("--valid-fraction", pt.valid_fraction, "Held-out fraction of tables")->capture_default_str();

  FinetuneOptions ft;
  auto* finetune = app.add_subcommand("finetune", "Cross-encoder finetuning on a pair manifest");
  finetune->add_option("--manifest", ft.manifest, "Pair manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  finetune->add_option("--out,-o", ft.out, "Model directory")->required();
  finetune->add_option("--init", ft.init, "Pretrained model directory")->check(CLI::ExistingDirectory);
  finetune->add_option("--valid-fraction", ft.valid_fraction, "Held-out fraction of pairs")->capture_default_str();
  finetune->add_option("--folds", ft.folds, "k-fold cross-validation instead of a single split");

  IndexOptions ix;
  auto* index = app.add_subcommand("index", "Embed a corpus into column, table and LSH indexes");
  index->add_option("--tables", ix.tables, "Directory of CSV files")->required()->check(CLI::ExistingDirectory);
  index->add_option("--model", ix.model, "Model directory")->required()->check(CLI::ExistingDirectory);
  index->add_option("--out,-o", ix.out, "Index directory")->required();
  index->add_option("--value-embeddings", ix.value_embeddings, "JSON lines of per-column value embeddings")
      ->check(CLI::ExistingFile);
  index->add_option("--lsh-trees", ix.lsh_trees, "LSH Forest trees")->capture_default_str();

  SearchOptions se;
  auto* search = app.add_subcommand("search", "Top-k table search against an index");
  search->add_option("--index", se.index, "Index directory")->required()->check(CLI::ExistingDirectory);
  search->add_option("--out,-o", se.out, "Output directory")->required();
  search->add_option("--mode", se.mode, "Search pathway")
      ->check(CLI::IsMember({"join", "union", "subset", "neardup"}))
      ->capture_default_str();
  search->add_option("--queries", se.queries, "Query CSV directory (default: the indexed tables)")
      ->check(CLI::ExistingDirectory);
  search->add_option("--k,-k", se.k, "Results per query")->capture_default_str();
  search->add_option("--query-column", se.query_column, "1-based join column (join mode)")->capture_default_str();

  RerankOptions rr;
  auto* rerank = app.add_subcommand("rerank", "Rescore the top results of a search");
  rerank->add_option("--results", rr.results, "Stage-one results.jsonl")->required()->check(CLI::ExistingFile);
  rerank->add_option("--out,-o", rr.out, "Output directory")->required();
  rerank->add_option("--scorer", rr.scorer, "Stage-two scorer")
      ->check(CLI::IsMember({"oracle", "jaccard", "cross-encoder"}))
      ->capture_default_str();
  rerank->add_option("--ground-truth", rr.ground_truth, "Ground truth (oracle scorer)")->check(CLI::ExistingFile);
  rerank->add_option("--tables", rr.tables, "Corpus CSV directory")->check(CLI::ExistingDirectory);
  rerank->add_option("--queries", rr.queries, "Query CSV directory when separate")->check(CLI::ExistingDirectory);
  rerank->add_option("--model", rr.model, "Finetuned model directory")->check(CLI::ExistingDirectory);
  rerank->add_option("--k,-k", rr.k, "Results kept per query")->capture_default_str();
  rerank->add_option("--n-retrieve", rr.n_retrieve, "Stage-one candidates rescored")->capture_default_str();

  BenchgenOptions bg;
  auto* benchgen = app.add_subcommand("benchgen", "Generate a benchmark with ground truth from source tables");
  benchgen->add_option("sources", bg.sources, "Directory of source CSV files")->required()->check(CLI::ExistingDirectory);
  benchgen->add_option("--out,-o", bg.out, "Benchmark directory")->required();
  benchgen->add_option("--kind", bg.kind, "Benchmark kind")
      ->check(CLI::IsMember({"join", "ckan-subset", "variants"}))
      ->capture_default_str();
  benchgen->add_option("--preset", bg.preset, "Variant preset")
      ->check(CLI::IsMember({"subset", "neardup"}))
      ->capture_default_str();

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "P@k, R@k and F1@k of search results");
  eval->add_option("--results", ev.results, "results.jsonl")->required()->check(CLI::ExistingFile);
  eval->add_option("--ground-truth", ev.ground_truth, "ground_truth.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--out,-o", ev.out, "Output directory")->required();
  eval->add_option("--k,-k", ev.ks, "Cutoffs")->delimiter(',')->capture_default_str();

  AblateOptions ab;
  auto* ablate = app.add_subcommand("ablate", "Only-X / without-X sweep over the three sketch families");
  ablate->add_option("--manifest", ab.manifest, "Pair manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  ablate->add_option("--out,-o", ab.out, "Output directory")->required();
  ablate->add_option("--init", ab.init, "Pretrained model directory")->check(CLI::ExistingDirectory);
  ablate->add_option("--valid-fraction", ab.valid_fraction, "Held-out fraction of pairs")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  spdlog::set_level(common.verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
  if (*config_opt) common.config_path = config_path;
  if (*seed_opt) common.seed = seed;

  try {
    if (*sketch) cmd_sketch(common, sk);
    else if (*pretrain) cmd_pretrain(common, pt);
    else if (*finetune) cmd_finetune(common, ft);
    else if (*index) cmd_index(common, ix);
    else if (*search) cmd_search(common, se);
    else if (*rerank) cmd_rerank(common, rr);
    else if (*benchgen) cmd_benchgen(common, bg);
    else if (*eval) cmd_eval(common, ev);
    else if (*ablate) cmd_ablate(common, ab);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("unexpected failure: {}", e.what());
    return 1;
  }
  return 0;
}
