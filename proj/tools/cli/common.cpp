#include "common.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "lakesketch/checkpoint.hpp"
#include "lakesketch/errors.hpp"
#include "lakesketch/sketch_io.hpp"

namespace lakesketch::cli {

using nlohmann::json;

RunConfig resolve_config(const Common& common, const RunConfig& base) {
  RunConfig c = base;
  if (const char* env = std::getenv("LAKESKETCH_SEED"); env && *env) {
    try {
      c.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("LAKESKETCH_SEED is not an unsigned integer: ") + env);
    }
  }
  if (common.config_path) c = load_run_config(*common.config_path, c);
  if (common.seed) c.seed = *common.seed;
  return c;
}

std::size_t worker_count(std::size_t jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min(worker_count(jobs), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == extension) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Table> load_tables(const fs::path& dir, std::size_t jobs, bool has_header,
                               std::vector<std::string>* skipped) {
  CsvOptions options;
  options.has_header = has_header;
  const auto files = list_files(dir, ".csv");
  std::vector<std::optional<Table>> parsed(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    try {
      parsed[i] = parse_csv(files[i], options);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  std::vector<Table> out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (parsed[i]) {
      out.push_back(std::move(*parsed[i]));
    } else {
      spdlog::warn("skipping {}: {}", files[i].string(), errors[i]);
      if (skipped) skipped->push_back(files[i].filename().string() + ": " + errors[i]);
    }
  }
  return out;
}

std::vector<TableSketch> load_sketches(const fs::path& dir, const SketchConfig& config, std::size_t jobs,
                                       bool has_header) {
  const auto tsk = list_files(dir, ".tsk");
  std::vector<TableSketch> out;
  if (!tsk.empty()) {
    out.resize(tsk.size());
    parallel_for(tsk.size(), jobs, [&](std::size_t i) { out[i] = load_sketch(tsk[i]); });
    for (const auto& s : out) {
      if (!s.columns.empty() && s.columns[0].cells.num_perm() != config.num_perm) {
        throw IncompatibleSketchError("sketch " + s.table_id + " has num_perm " +
                                      std::to_string(s.columns[0].cells.num_perm()) + ", expected " +
                                      std::to_string(config.num_perm));
      }
    }
    return out;
  }
  const auto tables = load_tables(dir, jobs, has_header);
  out.resize(tables.size());
  parallel_for(tables.size(), jobs, [&](std::size_t i) { out[i] = sketch_table(tables[i], config); });
  return out;
}

TableMetadata metadata_of(const TableSketch& sketch) {
  TableMetadata m;
  m.description = sketch.description;
  m.column_names = sketch.column_names;
  for (const auto& c : sketch.columns) m.column_types.push_back(c.type);
  return m;
}

Vocabulary vocab_of(std::span<const TableSketch> sketches) {
  std::vector<TableMetadata> meta;
  meta.reserve(sketches.size());
  for (const auto& s : sketches) meta.push_back(metadata_of(s));
  return build_vocab(std::span<const TableMetadata>(meta));
}

ModelDir load_model_dir(const fs::path& dir) {
  for (const char* f : {"model.json", "vocab.json", "config.json"}) {
    if (!fs::exists(dir / f)) {
      throw IoError("model directory " + dir.string() + " has no " + f + " (run pretrain or finetune first)");
    }
  }
  return {load_checkpoint(dir / "model.json"), Vocabulary::load(dir / "vocab.json"),
          load_run_config(dir / "config.json")};
}

void save_model_dir(const fs::path& dir, const EncoderModel& model, const Vocabulary& vocab,
                    const RunConfig& config) {
  fs::create_directories(dir);
  save_checkpoint(model, dir / "model.json");
  vocab.save(dir / "vocab.json");
  write_json(dir / "config.json", to_json(config));
}

PairSet load_pairs(const fs::path& manifest, const SketchConfig& config, std::size_t jobs) {
  const auto records = read_pair_manifest(manifest);
  if (records.empty()) throw FormatError("manifest " + manifest.string() + " has no pair records");
  PairSet set;
  set.task = task_kind_for(records[0].task);
  std::map<fs::path, std::size_t> index;
  for (const auto& r : records) {
    if (task_kind_for(r.task) != set.task) {
      throw FormatError("manifest mixes task kinds: " + records[0].task + " and " + r.task);
    }
    for (const auto& p : {r.table_a_path, r.table_b_path}) {
      if (index.emplace(p, set.table_paths.size()).second) set.table_paths.push_back(p);
    }
  }
  set.tables.resize(set.table_paths.size());
  std::vector<TableSketch> sketches(set.table_paths.size());
  parallel_for(set.table_paths.size(), jobs, [&](std::size_t i) {
    if (!fs::exists(set.table_paths[i])) throw IoError("manifest references missing table " + set.table_paths[i].string());
    set.tables[i] = parse_csv(set.table_paths[i]);
    sketches[i] = sketch_table(set.tables[i], config);
  });
  for (const auto& r : records) {
    set.examples.push_back({sketches[index.at(r.table_a_path)], sketches[index.at(r.table_b_path)],
                            parse_label(r.label, set.task)});
  }
  return set;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace lakesketch::cli
