#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "lakesketch/benchgen.hpp"
#include "lakesketch/errors.hpp"
#include "lakesketch/eval.hpp"
#include "lakesketch/search.hpp"
#include "lakesketch/sketch_io.hpp"

namespace lakesketch::cli {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSplitSalt = 0x9e3779b97f4a7c15ULL;

/// Checks that every declared output exists and parses, then writes
/// config.json and run.json into `out`.
void finish(const std::string& command, const RunConfig& config, std::vector<fs::path> inputs,
            std::vector<fs::path> outputs, json extra, const fs::path& out) {
  for (const auto& p : outputs) {
    if (!fs::is_regular_file(p)) throw IoError("declared output was not written: " + p.string());
    if (p.extension() == ".json") {
      read_json(p);
    } else if (p.extension() == ".jsonl") {
      std::ifstream in(p);
      std::string line;
      for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.empty()) continue;
        if (!json::accept(line)) throw FormatError(p.string() + ":" + std::to_string(n) + ": invalid JSON line");
      }
    }
  }
  write_json(out / "config.json", to_json(config));
  outputs.push_back(out / "config.json");
  for (auto& p : outputs) p = p.lexically_relative(out);
  std::sort(inputs.begin(), inputs.end());
  inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
  write_run_record({command, config, std::move(inputs), std::move(outputs), std::move(extra)}, out / "run.json");
  spdlog::info("{}: wrote {}", command, (out / "run.json").string());
}

struct Split {
  std::vector<std::size_t> train, valid;
};

Split split_indices(std::size_t n, double valid_fraction, std::uint64_t seed) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) throw InvalidArgument("--valid-fraction must be in (0, 1)");
  if (n < 2) throw InvalidArgument("need at least 2 items to split into train and validation");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed ^ kSplitSalt);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_valid = static_cast<std::size_t>(std::llround(static_cast<double>(n) * valid_fraction));
  n_valid = std::clamp<std::size_t>(n_valid, 1, n - 1);
  Split s;
  s.valid.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_valid));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_valid), order.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

template <class T>
std::vector<T> gather(const std::vector<T>& items, const std::vector<std::size_t>& ids) {
  std::vector<T> out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(items[i]);
  return out;
}

std::vector<fs::path> table_files(const fs::path& dir, std::span<const Table> tables) {
  std::vector<fs::path> out;
  for (const auto& t : tables) out.push_back(dir / (t.id + ".csv"));
  return out;
}

std::vector<TableSketch> sketch_all(std::span<const Table> tables, const SketchConfig& config, std::size_t jobs) {
  std::vector<TableSketch> out(tables.size());
  parallel_for(tables.size(), jobs, [&](std::size_t i) { out[i] = sketch_table(tables[i], config); });
  return out;
}

/// Model, vocabulary and config for a pair task: from --init when given,
/// otherwise fresh weights over the manifest's vocabulary.
struct PairSetup {
  RunConfig config;
  PairSet pairs;
  Vocabulary vocab;
  EncoderModel model;
  std::vector<fs::path> inputs;
};

PairSetup setup_pairs(const Common& common, const fs::path& manifest, const std::optional<fs::path>& init) {
  PairSetup s;
  s.config = resolve_config(common);
  std::optional<ModelDir> md;
  if (init) {
    md = load_model_dir(*init);
    s.config.sketch = md->config.sketch;
    s.config.encoder = md->config.encoder;
    s.config.ablation.mlp_mode = md->config.ablation.mlp_mode;
    s.inputs = {*init / "model.json", *init / "model.bin", *init / "vocab.json"};
  }
  s.pairs = load_pairs(manifest, s.config.sketch, common.jobs);
  s.inputs.push_back(manifest);
  s.inputs.insert(s.inputs.end(), s.pairs.table_paths.begin(), s.pairs.table_paths.end());
  if (md) {
    s.vocab = md->vocab;
    s.model = md->model;
  } else {
    std::vector<TableSketch> all;
    for (const auto& ex : s.pairs.examples) {
      all.push_back(ex.table_a);
      all.push_back(ex.table_b);
    }
    s.vocab = vocab_of(all);
    s.model = EncoderModel(s.config.resolved_encoder(s.vocab.size()));
  }
  if (s.config.ablation.random_pt) {
    spdlog::info("random_pt: re-randomizing encoder weights");
    s.model.reinitialize_encoder(s.config.seed);
  }
  spdlog::info("{} pairs, task {}, vocabulary {}", s.pairs.examples.size(), to_string(s.pairs.task), s.vocab.size());
  return s;
}

double best_metric(const TrainResult& r) {
  for (const auto& e : r.history) {
    if (e.epoch == r.best_epoch) return e.valid_metric;
  }
  return r.history.empty() ? 0.0 : r.history.back().valid_metric;
}

struct IndexMeta {
  fs::path dir;
  fs::path tables_dir;
  fs::path model_dir;
  std::optional<fs::path> value_embeddings;
  bool has_header = true;
};

IndexMeta read_index_meta(const fs::path& dir) {
  const auto path = dir / "index.json";
  if (!fs::exists(path)) throw IoError("no index.json in " + dir.string() + " (run `lakesketch index` first)");
  const auto j = read_json(path);
  IndexMeta m;
  m.dir = dir;
  try {
    m.tables_dir = j.at("tables_dir").get<std::string>();
    m.model_dir = j.at("model_dir").get<std::string>();
    m.has_header = j.value("has_header", true);
    if (j.contains("value_embeddings") && !j["value_embeddings"].is_null()) {
      m.value_embeddings = j["value_embeddings"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed " + path.string() + ": " + e.what());
  }
  return m;
}

std::vector<Vector> with_values(const TableSketch& sketch, const std::vector<Vector>& columns,
                                const ValueEmbeddings* values) {
  if (!values) return columns;
  std::vector<Vector> out;
  out.reserve(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto it = values->find({sketch.table_id, static_cast<int>(c + 1)});
    if (it == values->end()) {
      throw InvalidArgument("no value embedding for " + sketch.table_id + " column " + std::to_string(c + 1));
    }
    out.push_back(concat_normalized(columns[c], it->second));
  }
  return out;
}

double exact_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common, ++i, ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::map<std::string, Table> tables_by_id(const fs::path& dir, std::size_t jobs, bool has_header) {
  std::map<std::string, Table> out;
  for (auto& t : load_tables(dir, jobs, has_header)) out.emplace(t.id, std::move(t));
  return out;
}

}  // namespace

void cmd_sketch(const Common& common, const SketchOptions& o) {
  const auto config = resolve_config(common);
  fs::create_directories(o.out);
  std::vector<std::string> skipped;
  const auto tables = load_tables(o.corpus, common.jobs, !common.no_header, &skipped);
  std::vector<fs::path> outputs(tables.size());
  parallel_for(tables.size(), common.jobs, [&](std::size_t i) {
    outputs[i] = o.out / (tables[i].id + ".tsk");
    save_sketch(sketch_table(tables[i], config.sketch), outputs[i]);
  });
  auto stats = stats_report(tables);
  stats["skipped"] = skipped;
  stats["num_perm"] = config.sketch.num_perm;
  write_json(o.out / "stats.json", stats);
  outputs.push_back(o.out / "stats.json");
  spdlog::info("sketched {} tables, skipped {}", tables.size(), skipped.size());
  finish("sketch", config, table_files(o.corpus, tables), outputs,
         {{"tables", tables.size()}, {"skipped", skipped.size()}}, o.out);
}

void cmd_pretrain(const Common& common, const PretrainOptions& o) {
  const auto config = resolve_config(common);
  const auto sketches = load_sketches(o.sketches, config.sketch, common.jobs, !common.no_header);
  const auto split = split_indices(sketches.size(), o.valid_fraction, config.seed);
  const auto vocab = vocab_of(sketches);
  EncoderModel model(config.resolved_encoder(vocab.size()));
  spdlog::info("pretraining on {} tables ({} validation), {} parameters", split.train.size(), split.valid.size(),
               model.parameter_count());
  const auto train_cfg = config.resolved_train();
  const auto result = pretrain(gather(sketches, split.train), gather(sketches, split.valid), vocab, model,
                               train_cfg, config.ablation.streams());
  fs::create_directories(o.out);
  save_model_dir(o.out, result.best, vocab, config);
  write_json(o.out / "report.json", to_json(result, train_cfg));
  auto inputs = list_files(o.sketches, ".tsk");
  if (inputs.empty()) inputs = list_files(o.sketches, ".csv");
  finish("pretrain", config, inputs,
         {o.out / "model.json", o.out / "model.bin", o.out / "vocab.json", o.out / "report.json"},
         {{"train_tables", split.train.size()}, {"valid_tables", split.valid.size()}}, o.out);
}

void cmd_finetune(const Common& common, const FinetuneOptions& o) {
  auto s = setup_pairs(common, o.manifest, o.init);
  const auto train_cfg = s.config.resolved_train();
  const auto streams = s.config.ablation.streams();
  const auto& examples = s.pairs.examples;
  json report;
  EncoderModel best;
  if (o.folds >= 2) {
    const auto folds = kfold_split(examples.size(), o.folds, s.config.seed);
    json per_fold = json::array();
    double sum = 0.0, top = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < folds.size(); ++f) {
      auto r = finetune(gather(examples, folds[f].train), gather(examples, folds[f].valid), s.vocab, s.model,
                        s.pairs.task, train_cfg, streams);
      const double metric = best_metric(r);
      spdlog::info("fold {}: validation metric {:.4f}", f + 1, metric);
      per_fold.push_back({{"fold", f + 1}, {"metric", metric}, {"training", to_json(r, train_cfg)}});
      sum += metric;
      if (metric > top) {
        top = metric;
        best = std::move(r.best);
      }
    }
    report = {{"folds", per_fold}, {"mean_metric", sum / static_cast<double>(folds.size())}};
  } else {
    const auto split = split_indices(examples.size(), o.valid_fraction, s.config.seed);
    const auto valid = gather(examples, split.valid);
    auto r = finetune(gather(examples, split.train), valid, s.vocab, s.model, s.pairs.task, train_cfg, streams);
    const auto ev = evaluate_pairs(valid, s.vocab, r.best, s.pairs.task, streams);
    spdlog::info("validation metric {:.4f}", ev.metric);
    report = {{"training", to_json(r, train_cfg)}, {"valid_metric", ev.metric}, {"valid_loss", ev.loss}};
    best = std::move(r.best);
  }
  report["task"] = to_string(s.pairs.task);
  report["metric"] = s.pairs.task == TaskKind::Regression ? "r2" : "weighted_f1";
  fs::create_directories(o.out);
  save_model_dir(o.out, best, s.vocab, s.config);
  write_json(o.out / "report.json", report);
  finish("finetune", s.config, s.inputs,
         {o.out / "model.json", o.out / "model.bin", o.out / "vocab.json", o.out / "report.json"},
         {{"pairs", examples.size()}, {"folds", o.folds}}, o.out);
}

void cmd_index(const Common& common, const IndexOptions& o) {
  const auto config = resolve_config(common);
  const auto md = load_model_dir(o.model);
  const auto streams = md.config.ablation.streams();
  const auto tables = load_tables(o.tables, common.jobs, !common.no_header);
  if (tables.empty()) throw InvalidArgument("no readable tables in " + o.tables.string());
  const auto sketches = sketch_all(tables, md.config.sketch, common.jobs);
  std::vector<SketchEmbeddings> emb(sketches.size());
  parallel_for(sketches.size(), common.jobs,
               [&](std::size_t i) { emb[i] = embed_sketch(sketches[i], md.model, md.vocab, streams); });
  std::optional<ValueEmbeddings> values;
  if (o.value_embeddings) values = load_value_embeddings(*o.value_embeddings);

  EmbeddingIndex columns, table_index;
  LshForest lsh(o.lsh_trees);
  for (std::size_t i = 0; i < sketches.size(); ++i) {
    const auto& id = sketches[i].table_id;
    table_index.add(id, 0, emb[i].table);
    const auto vecs = with_values(sketches[i], emb[i].columns, values ? &*values : nullptr);
    for (std::size_t c = 0; c < vecs.size(); ++c) columns.add(id, static_cast<int>(c + 1), vecs[c]);
    for (std::size_t c = 0; c < sketches[i].columns.size(); ++c) {
      lsh.add(id + ":" + std::to_string(c + 1), sketches[i].columns[c].cells);
    }
  }
  lsh.index();
  fs::create_directories(o.out);
  save_index(columns, o.out / "column_index.json");
  save_index(table_index, o.out / "table_index.json");
  write_json(o.out / "lsh.json", to_json(lsh));
  json meta = {{"tables_dir", fs::absolute(o.tables).lexically_normal().string()},
               {"model_dir", fs::absolute(o.model).lexically_normal().string()},
               {"has_header", !common.no_header},
               {"tables", tables.size()},
               {"columns", columns.size()},
               {"value_embeddings", nullptr}};
  if (o.value_embeddings) meta["value_embeddings"] = fs::absolute(*o.value_embeddings).lexically_normal().string();
  write_json(o.out / "index.json", meta);
  spdlog::info("indexed {} tables, {} columns", tables.size(), columns.size());
  auto inputs = table_files(o.tables, tables);
  inputs.push_back(o.model / "model.json");
  if (o.value_embeddings) inputs.push_back(*o.value_embeddings);
  finish("index", config, inputs,
         {o.out / "column_index.json", o.out / "column_index.bin", o.out / "table_index.json",
          o.out / "table_index.bin", o.out / "lsh.json", o.out / "index.json"},
         {{"tables", tables.size()}, {"columns", columns.size()}}, o.out);
}

void cmd_search(const Common& common, const SearchOptions& o) {
  const auto config = resolve_config(common);
  static const std::set<std::string> modes{"join", "union", "subset", "neardup"};
  if (!modes.count(o.mode)) throw InvalidArgument("unknown --mode '" + o.mode + "' (join, union, subset, neardup)");
  if (o.k == 0) throw InvalidArgument("--k must be positive");
  const auto meta = read_index_meta(o.index);
  const auto md = load_model_dir(meta.model_dir);
  const auto streams = md.config.ablation.streams();

  std::vector<std::vector<SearchRecord>> per_query;
  std::vector<fs::path> inputs{o.index / "index.json"};
  auto push_hits = [](const std::string& q, const std::vector<TableHit>& hits) {
    std::vector<SearchRecord> out;
    for (std::size_t r = 0; r < hits.size(); ++r) {
      out.push_back({q, r + 1, hits[r].table_id, 0, hits[r].distance, 1.0 - hits[r].distance});
    }
    return out;
  };

  if (o.mode == "neardup" && !o.queries) {
    const auto tables = load_index(o.index / "table_index.json");
    inputs.push_back(o.index / "table_index.json");
    for (const auto& [q, hits] : near_duplicate_scan(tables, o.k)) per_query.push_back(push_hits(q, hits));
  } else {
    const auto qdir = o.queries ? *o.queries : meta.tables_dir;
    const auto qtables = load_tables(qdir, common.jobs, meta.has_header);
    const auto inputs_q = table_files(qdir, qtables);
    inputs.insert(inputs.end(), inputs_q.begin(), inputs_q.end());
    const auto qsketches = sketch_all(qtables, md.config.sketch, common.jobs);
    per_query.resize(qsketches.size());

    if (o.mode == "join") {
      inputs.push_back(o.index / "lsh.json");
      const auto lsh = lsh_forest_from_json(read_json(o.index / "lsh.json"));
      parallel_for(qsketches.size(), common.jobs, [&](std::size_t i) {
        const auto& q = qsketches[i];
        if (o.query_column < 1 || static_cast<std::size_t>(o.query_column) > q.columns.size()) {
          throw InvalidArgument("--query-column " + std::to_string(o.query_column) + " is out of range for " +
                                q.table_id);
        }
        const auto& sig = q.columns[static_cast<std::size_t>(o.query_column - 1)].cells;
        std::vector<std::pair<std::string, double>> best;
        for (std::size_t n = o.k * 4 + q.columns.size();; n *= 2) {
          const auto hits = lsh.query(sig, n);
          best.clear();
          std::set<std::string> seen{q.table_id};
          for (const auto& [key, score] : hits) {
            auto table = key.substr(0, key.rfind(':'));
            if (seen.insert(table).second) best.emplace_back(std::move(table), score);
          }
          if (best.size() >= o.k || hits.size() < n || n >= lsh.size()) break;
        }
        if (best.size() > o.k) best.resize(o.k);
        for (std::size_t r = 0; r < best.size(); ++r) {
          per_query[i].push_back({q.table_id, r + 1, best[r].first, 1, 1.0 - best[r].second, best[r].second});
        }
      });
    } else if (o.mode == "union") {
      inputs.push_back(o.index / "column_index.json");
      const auto index = load_index(o.index / "column_index.json");
      std::optional<ValueEmbeddings> values;
      if (meta.value_embeddings) values = load_value_embeddings(*meta.value_embeddings);
      parallel_for(qsketches.size(), common.jobs, [&](std::size_t i) {
        const auto& q = qsketches[i];
        const auto emb = embed_sketch(q, md.model, md.vocab, streams);
        const auto vecs = with_values(q, emb.columns, values ? &*values : nullptr);
        const auto ranked = near_tables(q.table_id, vecs, index, o.k);
        for (std::size_t r = 0; r < ranked.size(); ++r) {
          const auto& t = ranked[r];
          const double mean = t.distance_sum / static_cast<double>(std::max<std::size_t>(t.matched_columns, 1));
          per_query[i].push_back({q.table_id, r + 1, t.table_id, t.matched_columns, t.distance_sum,
                                  static_cast<double>(t.matched_columns) - mean / 2.0});
        }
      });
    } else {
      inputs.push_back(o.index / "table_index.json");
      const auto index = load_index(o.index / "table_index.json");
      parallel_for(qsketches.size(), common.jobs, [&](std::size_t i) {
        const auto& q = qsketches[i];
        const auto v = table_embedding(q, md.model, md.vocab, streams);
        per_query[i] = push_hits(q.table_id, subset_search(q.table_id, v, index, o.k));
      });
    }
  }

  std::vector<SearchRecord> records;
  for (auto& q : per_query) records.insert(records.end(), q.begin(), q.end());
  fs::create_directories(o.out);
  write_search_results(records, o.out / "results.jsonl");
  spdlog::info("{} search: {} queries, {} results", o.mode, per_query.size(), records.size());
  finish("search", config, inputs, {o.out / "results.jsonl"},
         {{"mode", o.mode}, {"k", o.k}, {"queries", per_query.size()}}, o.out);
}

void cmd_rerank(const Common& common, const RerankOptions& o) {
  const auto config = resolve_config(common);
  if (o.k == 0 || o.n_retrieve == 0) throw InvalidArgument("--k and --n-retrieve must be positive");
  const auto records = read_search_results(o.results);
  const auto lists = ranked_lists(records);
  std::map<std::pair<std::string, std::string>, SearchRecord> first_stage;
  for (const auto& r : records) first_stage.emplace(std::pair{r.query_id, r.table_id}, r);
  std::vector<fs::path> inputs{o.results};

  // (query id, candidate id) -> score
  std::function<double(const std::string&, const std::string&)> score;
  GroundTruth truth;
  std::map<std::string, std::vector<std::vector<std::string>>> cells;
  std::map<std::string, TableSketch> sketches;
  std::optional<ModelDir> md;
  TaskKind task = TaskKind::Binary;

  auto require_tables = [&]() {
    if (!o.tables) throw InvalidArgument("--scorer " + o.scorer + " needs --tables (the searched corpus)");
    auto corpus = tables_by_id(*o.tables, common.jobs, !common.no_header);
    if (o.queries) {
      for (auto& [id, t] : tables_by_id(*o.queries, common.jobs, !common.no_header)) corpus.emplace(id, std::move(t));
    }
    return corpus;
  };
  auto lookup = [](const auto& map, const std::string& id) -> const auto& {
    auto it = map.find(id);
    if (it == map.end()) throw InvalidArgument("table '" + id + "' from the results file was not found");
    return it->second;
  };

  if (o.scorer == "oracle") {
    if (!o.ground_truth) throw InvalidArgument("--scorer oracle needs --ground-truth");
    truth = load_ground_truth(*o.ground_truth);
    inputs.push_back(*o.ground_truth);
    score = [&](const std::string& q, const std::string& c) {
      auto it = truth.find(q);
      return it != truth.end() && it->second.count(c) ? 1.0 : 0.0;
    };
  } else if (o.scorer == "jaccard") {
    for (const auto& [id, t] : require_tables()) {
      auto& sets = cells[id];
      for (const auto& col : t.columns) sets.push_back(cell_set(col));
    }
    score = [&](const std::string& q, const std::string& c) {
      double best = 0.0;
      for (const auto& a : lookup(cells, q)) {
        for (const auto& b : lookup(cells, c)) best = std::max(best, exact_jaccard(a, b));
      }
      return best;
    };
  } else if (o.scorer == "cross-encoder") {
    if (!o.model) throw InvalidArgument("--scorer cross-encoder needs --model (a finetuned model directory)");
    md = load_model_dir(*o.model);
    inputs.push_back(*o.model / "model.json");
    bool found = false;
    for (const auto& [kind, head] : md->model.heads) {
      if (kind != TaskKind::Mlm) {
        task = kind;
        found = true;
        break;
      }
    }
    if (!found) throw InvalidArgument("model in " + o.model->string() + " has no pair head (run finetune first)");
    for (const auto& [id, t] : require_tables()) sketches.emplace(id, sketch_table(t, md->config.sketch));
    score = [&](const std::string& q, const std::string& c) {
      const auto input = build_cross_encoder_input(lookup(sketches, q), lookup(sketches, c), md->vocab,
                                                   md->model.config(), md->config.ablation.streams());
      return pair_score(md->model, task, input);
    };
  } else {
    throw InvalidArgument("unknown --scorer '" + o.scorer + "' (oracle, jaccard, cross-encoder)");
  }

  std::vector<std::pair<std::string, std::vector<std::string>>> queries(lists.begin(), lists.end());
  std::vector<std::vector<SearchRecord>> per_query(queries.size());
  parallel_for(queries.size(), common.jobs, [&](std::size_t i) {
    const auto& [q, list] = queries[i];
    Retriever retriever = [&list](std::size_t n) {
      return std::vector<std::string>(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(std::min(n, list.size())));
    };
    const auto outcome = retrieve_and_rerank(retriever, [&](const std::string& c) { return score(q, c); }, o.k,
                                             o.n_retrieve);
    for (std::size_t r = 0; r < outcome.ranked.size(); ++r) {
      const auto& c = outcome.ranked[r];
      const auto& prev = first_stage.at({q, c.table_id});
      per_query[i].push_back({q, r + 1, c.table_id, prev.matched_columns, prev.distance_sum, c.score});
    }
  });
  std::vector<SearchRecord> out;
  for (auto& q : per_query) out.insert(out.end(), q.begin(), q.end());
  fs::create_directories(o.out);
  write_search_results(out, o.out / "results.jsonl");
  finish("rerank", config, inputs, {o.out / "results.jsonl"},
         {{"scorer", o.scorer}, {"k", o.k}, {"n_retrieve", o.n_retrieve}, {"queries", queries.size()}}, o.out);
}

void cmd_benchgen(const Common& common, const BenchgenOptions& o) {
  const auto config = resolve_config(common);
  const auto kind = benchmark_kind_from_string(o.kind);
  const auto preset = variant_preset_from_string(o.preset);
  std::vector<std::string> unreadable;
  const auto sources = load_tables(o.sources, common.jobs, !common.no_header, &unreadable);
  if (sources.empty()) throw InvalidArgument("no readable source tables in " + o.sources.string());
  const auto bench = generate_benchmark(sources, kind, config.seed, preset);
  write_benchmark(bench, o.out);
  spdlog::info("{} benchmark: {} tables, {} pairs, {} variants, {} sources skipped", o.kind, bench.tables.size(),
               bench.pairs.size(), bench.variants.size(), bench.skipped.size());
  finish("benchgen", config, table_files(o.sources, sources),
         {o.out / "manifest.jsonl", o.out / "ground_truth.json", o.out / "stats.json"},
         {{"kind", o.kind},
          {"preset", o.preset},
          {"tables", bench.tables.size()},
          {"pairs", bench.pairs.size()},
          {"skipped", bench.skipped.size()},
          {"unreadable", unreadable.size()}},
         o.out);
}

void cmd_eval(const Common& common, const EvalOptions& o) {
  const auto config = resolve_config(common);
  if (o.ks.empty()) throw InvalidArgument("--k needs at least one value");
  const auto records = read_search_results(o.results);
  const auto truth = load_ground_truth(o.ground_truth);
  const auto metrics = evaluate_retrieval(ranked_lists(records), truth, o.ks);
  fs::create_directories(o.out);
  write_json(o.out / "metrics.json", to_json(std::span<const MetricRecord>(metrics)));
  {
    std::ofstream csv(o.out / "metrics.csv");
    csv << metrics_csv(metrics);
    if (!csv) throw IoError("failed writing " + (o.out / "metrics.csv").string());
  }
  for (const auto& m : metrics) spdlog::info("{}@{} = {:.4f}", m.metric, m.k, m.value);
  finish("eval", config, {o.results, o.ground_truth}, {o.out / "metrics.json", o.out / "metrics.csv"},
         {{"queries", truth.size()}}, o.out);
}

void cmd_ablate(const Common& common, const AblateOptions& o) {
  auto s = setup_pairs(common, o.manifest, o.init);
  const auto split = split_indices(s.pairs.examples.size(), o.valid_fraction, s.config.seed);
  const auto rows = ablate_sketches(gather(s.pairs.examples, split.train), gather(s.pairs.examples, split.valid),
                                    s.vocab, s.model, s.pairs.task, s.config.resolved_train());
  const std::string metric = s.pairs.task == TaskKind::Regression ? "r2" : "weighted_f1";
  json table = json::array();
  std::ostringstream md;
  md << "| Sketch | Only this sketch (" << metric << ") | Without this sketch (" << metric << ") |\n";
  md << "|---|---|---|\n";
  md.setf(std::ios::fixed);
  md.precision(4);
  for (const auto& r : rows) {
    table.push_back({{"family", r.family}, {"only", r.only}, {"without", r.without}});
    md << "| " << r.family << " | " << r.only << " | " << r.without << " |\n";
  }
  fs::create_directories(o.out);
  write_json(o.out / "ablation.json", {{"task", to_string(s.pairs.task)}, {"metric", metric}, {"rows", table}});
  {
    std::ofstream out(o.out / "ablation.md");
    out << md.str();
    if (!out) throw IoError("failed writing " + (o.out / "ablation.md").string());
  }
  spdlog::info("ablation:\n{}", md.str());
  finish("ablate", s.config, s.inputs, {o.out / "ablation.json", o.out / "ablation.md"},
         {{"pairs", s.pairs.examples.size()}}, o.out);
}

}  // namespace lakesketch::cli
