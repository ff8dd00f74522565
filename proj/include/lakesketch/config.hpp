#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lakesketch/encoder.hpp"
#include "lakesketch/sketch.hpp"
#include "lakesketch/training.hpp"

namespace lakesketch {

inline constexpr std::string_view kVersion = "0.1.0";

struct AblationFlags {
  bool use_minhash = true;
  bool use_numerical = true;
  bool use_snapshot = true;
  /// Re-randomize encoder weights before finetuning.
  bool random_pt = false;
  bool mlp_mode = false;

  SketchStreams streams() const { return {use_minhash, use_numerical, use_snapshot}; }
};

/// Everything a pipeline run depends on. JSON layout:
/// {"seed", "sketch": {...}, "encoder": {...}, "train": {...}, "ablation": {...}}.
/// Unknown keys are rejected at every level.
struct RunConfig {
  std::uint64_t seed = 0;
  SketchConfig sketch;
  EncoderConfig encoder;  // vocab_size and num_perm are filled in at run time
  TrainConfig train;
  AblationFlags ablation;

  /// Encoder config with num_perm, mlp_mode and the seed applied.
  EncoderConfig resolved_encoder(std::size_t vocab_size) const;
  /// Train config with the run seed applied.
  TrainConfig resolved_train() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Starts from `base` and overrides the keys present in `json`.
RunConfig run_config_from_json(const nlohmann::json& json, const RunConfig& base = {});
RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base = {});

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Provenance record written next to every command's outputs.
struct RunRecord {
  std::string command;
  RunConfig config;
  std::vector<std::filesystem::path> inputs;   // files hashed
  std::vector<std::filesystem::path> outputs;  // listed, not hashed
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json to_json(const RunRecord& record);
void write_run_record(const RunRecord& record, const std::filesystem::path& path);

}  // namespace lakesketch
