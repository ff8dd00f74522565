#include "lakesketch/sketch_io.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "lakesketch/errors.hpp"

namespace lakesketch {

using nlohmann::json;

namespace {

json signature_values(const MinHashSignature& sig) { return sig.values; }

MinHashSignature signature_from(const json& values, const HashFamily& family,
                                std::size_t num_perm) {
  MinHashSignature sig;
  sig.family = family;
  sig.values = values.get<std::vector<std::uint64_t>>();
  if (sig.values.size() != num_perm) throw FormatError("signature length differs from num_perm");
  return sig;
}

void check_family(const MinHashSignature& sig, const HashFamily& family, std::size_t num_perm) {
  if (sig.family != family || sig.num_perm() != num_perm) {
    throw IncompatibleSketchError("table sketch mixes hash families or signature lengths");
  }
}

}  // namespace

json to_json(const TableSketch& sketch) {
  const auto& family = sketch.content_snapshot.family;
  const auto num_perm = sketch.content_snapshot.num_perm();
  json columns = json::array();
  for (std::size_t c = 0; c < sketch.columns.size(); ++c) {
    const auto& col = sketch.columns[c];
    check_family(col.cells, family, num_perm);
    json entry = {
        {"name", sketch.column_names.at(c)},
        {"type", std::string(to_string(col.type))},
        {"cells", signature_values(col.cells)},
        {"numerical", col.numerical},
    };
    if (col.words) {
      check_family(*col.words, family, num_perm);
      entry["words"] = signature_values(*col.words);
    }
    columns.push_back(std::move(entry));
  }
  return json{
      {"format", "table-sketch"},
      {"version", kSketchFormatVersion},
      {"table_id", sketch.table_id},
      {"description", sketch.description},
      {"family", std::string(to_string(family.kind))},
      {"seed", family.seed},
      {"num_perm", num_perm},
      {"content_snapshot", signature_values(sketch.content_snapshot)},
      {"columns", std::move(columns)},
  };
}

TableSketch table_sketch_from_json(const json& j) {
  try {
    const HashFamily family{hash_kind_from_string(j.at("family").get<std::string>()),
                            j.at("seed").get<std::uint64_t>()};
    const auto num_perm = j.at("num_perm").get<std::size_t>();
    TableSketch sketch;
    sketch.table_id = j.at("table_id").get<std::string>();
    sketch.description = j.at("description").get<std::string>();
    sketch.content_snapshot = signature_from(j.at("content_snapshot"), family, num_perm);
    for (const auto& entry : j.at("columns")) {
      ColumnSketch col;
      col.type = column_type_from_string(entry.at("type").get<std::string>());
      col.cells = signature_from(entry.at("cells"), family, num_perm);
      if (entry.contains("words")) col.words = signature_from(entry.at("words"), family, num_perm);
      const auto numerical = entry.at("numerical").get<std::vector<double>>();
      if (numerical.size() != kNumericalSketchSize) throw FormatError("numerical sketch must have 16 slots");
      std::copy(numerical.begin(), numerical.end(), col.numerical.begin());
      sketch.column_names.push_back(entry.at("name").get<std::string>());
      sketch.columns.push_back(std::move(col));
    }
    return sketch;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed sketch JSON: ") + e.what());
  }
}

std::string encode_binary(const TableSketch& sketch) {
  const auto& family = sketch.content_snapshot.family;
  const auto num_perm = sketch.content_snapshot.num_perm();
  detail::ByteWriter w;
  w.raw(kSketchMagic);
  w.u32(kSketchFormatVersion);
  w.str(sketch.table_id);
  w.str(sketch.description);
  w.str(to_string(family.kind));
  w.u64(family.seed);
  w.u32(static_cast<std::uint32_t>(num_perm));
  for (auto v : sketch.content_snapshot.values) w.u64(v);
  w.u32(static_cast<std::uint32_t>(sketch.columns.size()));
  for (std::size_t c = 0; c < sketch.columns.size(); ++c) {
    const auto& col = sketch.columns[c];
    check_family(col.cells, family, num_perm);
    w.str(sketch.column_names.at(c));
    w.u8(static_cast<std::uint8_t>(col.type));
    w.u8(col.words ? 1 : 0);
    for (auto v : col.cells.values) w.u64(v);
    if (col.words) {
      check_family(*col.words, family, num_perm);
      for (auto v : col.words->values) w.u64(v);
    }
    for (double v : col.numerical) w.f64(v);
  }
  return std::move(w.buffer());
}

TableSketch decode_binary(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (r.take(kSketchMagic.size()) != kSketchMagic) throw FormatError("not a table sketch file");
  if (const auto version = r.u32(); version != kSketchFormatVersion) {
    throw FormatError("unsupported sketch version " + std::to_string(version));
  }
  TableSketch sketch;
  sketch.table_id = r.str();
  sketch.description = r.str();
  HashFamily family;
  family.kind = hash_kind_from_string(r.str());
  family.seed = r.u64();
  const std::size_t num_perm = r.u32();
  auto read_sig = [&] {
    MinHashSignature sig;
    sig.family = family;
    sig.values.resize(num_perm);
    for (auto& v : sig.values) v = r.u64();
    return sig;
  };
  sketch.content_snapshot = read_sig();
  const std::size_t columns = r.u32();
  for (std::size_t c = 0; c < columns; ++c) {
    ColumnSketch col;
    sketch.column_names.push_back(r.str());
    const auto code = r.u8();
    if (code < 1 || code > 4) throw FormatError("invalid column type code");
    col.type = static_cast<ColumnType>(code);
    const bool has_words = r.u8() != 0;
    col.cells = read_sig();
    if (has_words) col.words = read_sig();
    for (double& v : col.numerical) v = r.f64();
    sketch.columns.push_back(std::move(col));
  }
  if (!r.done()) throw FormatError("trailing bytes after table sketch");
  return sketch;
}

void save_sketch(const TableSketch& sketch, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (path.extension() == ".json") {
    out << to_json(sketch).dump() << '\n';
  } else {
    out << encode_binary(sketch);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

TableSketch load_sketch(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      return table_sketch_from_json(json::parse(buffer.str()));
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("invalid JSON in ") + path.string() + ": " + e.what());
    }
  }
  return decode_binary(buffer.str());
}

}  // namespace lakesketch
