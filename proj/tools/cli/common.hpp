#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lakesketch/config.hpp"
#include "lakesketch/encoder.hpp"
#include "lakesketch/sketch.hpp"
#include "lakesketch/table.hpp"
#include "lakesketch/tokenizer.hpp"
#include "lakesketch/training.hpp"

namespace lakesketch::cli {

namespace fs = std::filesystem;

/// Options shared by every subcommand.
struct Common {
  std::optional<fs::path> config_path;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;  // 0 = hardware concurrency
  bool verbose = false;
  bool no_header = false;
};

/// Default config, then LAKESKETCH_SEED, then the config file, then --seed.
RunConfig resolve_config(const Common& common, const RunConfig& base = {});

std::size_t worker_count(std::size_t jobs);
/// Runs fn(i) for i in [0, n) on `jobs` threads. The first exception is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Files with the given extension, sorted by name.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension);

/// Parses every CSV in `dir`; unreadable files are logged and skipped.
std::vector<Table> load_tables(const fs::path& dir, std::size_t jobs, bool has_header = true,
                               std::vector<std::string>* skipped = nullptr);

/// `.tsk` files when the directory has any, otherwise sketches of its CSVs.
std::vector<TableSketch> load_sketches(const fs::path& dir, const SketchConfig& config, std::size_t jobs,
                                       bool has_header = true);

TableMetadata metadata_of(const TableSketch& sketch);
Vocabulary vocab_of(std::span<const TableSketch> sketches);

/// A trained model directory: model.json/.bin, vocab.json, config.json.
struct ModelDir {
  EncoderModel model;
  Vocabulary vocab;
  RunConfig config;
};

ModelDir load_model_dir(const fs::path& dir);
void save_model_dir(const fs::path& dir, const EncoderModel& model, const Vocabulary& vocab, const RunConfig& config);

/// Pair examples loaded from a manifest, tables sketched once each.
struct PairSet {
  std::vector<PairExample> examples;
  TaskKind task = TaskKind::Binary;
  std::vector<Table> tables;  // distinct tables referenced
  std::vector<fs::path> table_paths;
};

PairSet load_pairs(const fs::path& manifest, const SketchConfig& config, std::size_t jobs);

void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

}  // namespace lakesketch::cli
