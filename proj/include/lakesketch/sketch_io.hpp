#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "lakesketch/sketch.hpp"

namespace lakesketch {

/// Binary sketch files start with this 16-byte magic ("TSKETCH1" + 8 NULs).
inline constexpr std::string_view kSketchMagic{"TSKETCH1\0\0\0\0\0\0\0\0", 16};
inline constexpr std::uint32_t kSketchFormatVersion = 1;

nlohmann::json to_json(const TableSketch& sketch);
TableSketch table_sketch_from_json(const nlohmann::json& json);

std::string encode_binary(const TableSketch& sketch);
TableSketch decode_binary(std::string_view bytes);

void save_sketch(const TableSketch& sketch, const std::filesystem::path& path);
/// Format is chosen by extension: `.json` for JSON, anything else binary.
TableSketch load_sketch(const std::filesystem::path& path);

}  // namespace lakesketch
