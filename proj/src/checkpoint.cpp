#include "lakesketch/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "lakesketch/errors.hpp"

namespace lakesketch {

using nlohmann::json;

namespace {

std::filesystem::path payload_path(const std::filesystem::path& header) {
  auto p = header;
  p.replace_extension(".bin");
  return p;
}

}  // namespace

void write_tensor_file(const std::filesystem::path& header, const TensorFile& file) {
  detail::ByteWriter payload;
  json blocks = json::array();
  for (const auto& [name, m] : file.blocks) {
    blocks.push_back({{"name", name},
                      {"shape", {m.rows(), m.cols()}},
                      {"offset", payload.buffer().size()}});
    for (Eigen::Index i = 0; i < m.size(); ++i) payload.f32(static_cast<float>(m.data()[i]));
  }
  const auto bin = payload_path(header);
  json head = {{"format", "lakesketch-tensors"},
               {"version", 1},
               {"dtype", "f32-le"},
               {"payload", bin.filename().string()},
               {"payload_bytes", payload.buffer().size()},
               {"meta", file.meta},
               {"blocks", std::move(blocks)}};
  std::ofstream out(header);
  if (!out) throw IoError("cannot write " + header.string());
  out << head.dump(2) << '\n';
  std::ofstream data(bin, std::ios::binary);
  if (!data) throw IoError("cannot write " + bin.string());
  data << payload.buffer();
  if (!out || !data) throw IoError("failed writing " + header.string());
}

TensorFile read_tensor_file(const std::filesystem::path& header) {
  std::ifstream in(header);
  if (!in) throw IoError("cannot open " + header.string());
  json head;
  try {
    head = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("invalid tensor header " + header.string() + ": " + e.what());
  }
  const auto bin = header.parent_path() / head.at("payload").get<std::string>();
  std::ifstream data(bin, std::ios::binary);
  if (!data) throw IoError("cannot open " + bin.string());
  std::ostringstream buffer;
  buffer << data.rdbuf();
  const auto bytes = buffer.str();
  if (bytes.size() != head.at("payload_bytes").get<std::size_t>()) {
    throw FormatError("payload size mismatch for " + bin.string());
  }

  TensorFile file;
  file.meta = head.at("meta");
  for (const auto& b : head.at("blocks")) {
    const auto rows = b.at("shape").at(0).get<Eigen::Index>();
    const auto cols = b.at("shape").at(1).get<Eigen::Index>();
    const auto offset = b.at("offset").get<std::size_t>();
    if (offset > bytes.size()) throw FormatError("block offset past end of payload");
    detail::ByteReader r(std::string_view(bytes).substr(offset));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f32();
    file.blocks.emplace_back(b.at("name").get<std::string>(), std::move(m));
  }
  return file;
}

json to_json(const EncoderConfig& c) {
  return {{"hidden", c.hidden},         {"layers", c.layers},         {"heads", c.heads},
          {"ffn", c.ffn},               {"vocab_size", c.vocab_size}, {"max_seq_len", c.max_seq_len},
          {"max_columns", c.max_columns}, {"num_perm", c.num_perm},   {"dropout", c.dropout},
          {"init_seed", c.init_seed},   {"mlp_mode", c.mlp_mode}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  c.hidden = j.at("hidden").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.ffn = j.at("ffn").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
  c.max_columns = j.at("max_columns").get<std::size_t>();
  c.num_perm = j.at("num_perm").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  c.mlp_mode = j.at("mlp_mode").get<bool>();
  c.validate();
  return c;
}

void save_checkpoint(const EncoderModel& model, const std::filesystem::path& header) {
  TensorFile file;
  json heads = json::array();
  for (const auto& [kind, head] : model.heads) {
    heads.push_back({{"task", std::string(to_string(kind))},
                     {"outputs", head.outputs()},
                     {"dropout", head.dropout}});
  }
  file.meta = {{"config", to_json(model.config())}, {"heads", std::move(heads)}};
  model.for_each_parameter([&](const std::string& name, const Matrix& m) { file.blocks.emplace_back(name, m); });
  write_tensor_file(header, file);
}

EncoderModel load_checkpoint(const std::filesystem::path& header) {
  auto file = read_tensor_file(header);
  try {
    EncoderModel model(encoder_config_from_json(file.meta.at("config")));
    for (const auto& h : file.meta.at("heads")) {
      auto& head = model.add_head(task_kind_from_string(h.at("task").get<std::string>()),
                                  h.at("outputs").get<std::size_t>());
      head.dropout = h.at("dropout").get<double>();
    }
    std::size_t next = 0;
    model.for_each_parameter([&](const std::string& name, Matrix& m) {
      if (next >= file.blocks.size()) throw FormatError("checkpoint is missing block " + name);
      auto& [stored_name, values] = file.blocks[next++];
      if (stored_name != name) throw FormatError("expected block " + name + ", found " + stored_name);
      if (values.rows() != m.rows() || values.cols() != m.cols()) {
        throw ShapeError("block " + name + " has shape " + std::to_string(values.rows()) + "x" +
                         std::to_string(values.cols()) + ", config expects " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
      }
      m = std::move(values);
    });
    if (next != file.blocks.size()) throw FormatError("checkpoint has unexpected extra blocks");
    return model;
  } catch (const json::exception& e) {
    throw FormatError("malformed checkpoint header " + header.string() + ": " + e.what());
  }
}

}  // namespace lakesketch
