#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lakesketch/encoder.hpp"

namespace lakesketch {

/// A JSON header (metadata, block names, shapes, byte offsets) next to a
/// little-endian f32 payload. `header` is `<stem>.json`; the payload is
/// written to `<stem>.bin`.
struct TensorFile {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Matrix>> blocks;
};

void write_tensor_file(const std::filesystem::path& header, const TensorFile& file);
TensorFile read_tensor_file(const std::filesystem::path& header);

nlohmann::json to_json(const EncoderConfig& config);
EncoderConfig encoder_config_from_json(const nlohmann::json& json);

void save_checkpoint(const EncoderModel& model, const std::filesystem::path& header);
/// Rebuilds the model from the header's config and validates every block
/// shape against it.
EncoderModel load_checkpoint(const std::filesystem::path& header);

}  // namespace lakesketch
