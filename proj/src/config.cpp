#include "lakesketch/config.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "lakesketch/errors.hpp"

namespace lakesketch {

using nlohmann::json;

namespace {

/// Reads known keys from one config section and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidArgument("config section '" + name_ + "' must be an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw InvalidArgument("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw InvalidArgument("unknown config key '" + (name_.empty() ? key : name_ + "." + key) + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

EncoderConfig RunConfig::resolved_encoder(std::size_t vocab_size) const {
  EncoderConfig c = encoder;
  c.vocab_size = vocab_size;
  c.num_perm = sketch.num_perm;
  c.mlp_mode = ablation.mlp_mode;
  c.init_seed = seed;
  return c;
}

TrainConfig RunConfig::resolved_train() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

json to_json(const RunConfig& c) {
  return {
      {"seed", c.seed},
      {"sketch",
       {{"num_perm", c.sketch.num_perm},
        {"hash", to_string(c.sketch.family.kind)},
        {"hash_seed", c.sketch.family.seed},
        {"snapshot_rows", c.sketch.snapshot_rows}}},
      {"encoder",
       {{"hidden", c.encoder.hidden},
        {"layers", c.encoder.layers},
        {"heads", c.encoder.heads},
        {"ffn", c.encoder.ffn},
        {"max_seq_len", c.encoder.max_seq_len},
        {"max_columns", c.encoder.max_columns},
        {"dropout", c.encoder.dropout}}},
      {"train",
       {{"lr", c.train.lr},
        {"batch_size", c.train.batch_size},
        {"max_epochs", c.train.max_epochs},
        {"max_steps", c.train.max_steps},
        {"patience", c.train.patience},
        {"mlm_prob", c.train.mlm_prob},
        {"frozen_encoder", c.train.frozen_encoder}}},
      {"ablation",
       {{"use_minhash", c.ablation.use_minhash},
        {"use_numerical", c.ablation.use_numerical},
        {"use_snapshot", c.ablation.use_snapshot},
        {"random_pt", c.ablation.random_pt},
        {"mlp_mode", c.ablation.mlp_mode}}},
  };
}

RunConfig run_config_from_json(const json& j, const RunConfig& base) {
  RunConfig c = base;
  Section top(j, "");
  top.read("seed", c.seed);
  if (const auto* s = top.child("sketch")) {
    Section sec(*s, "sketch");
    sec.read("num_perm", c.sketch.num_perm);
    std::string hash(to_string(c.sketch.family.kind));
    sec.read("hash", hash);
    c.sketch.family.kind = hash_kind_from_string(hash);
    sec.read("hash_seed", c.sketch.family.seed);
    sec.read("snapshot_rows", c.sketch.snapshot_rows);
    sec.finish();
  }
  if (const auto* s = top.child("encoder")) {
    Section sec(*s, "encoder");
    sec.read("hidden", c.encoder.hidden);
    sec.read("layers", c.encoder.layers);
    sec.read("heads", c.encoder.heads);
    sec.read("ffn", c.encoder.ffn);
    sec.read("max_seq_len", c.encoder.max_seq_len);
    sec.read("max_columns", c.encoder.max_columns);
    sec.read("dropout", c.encoder.dropout);
    sec.finish();
  }
  if (const auto* s = top.child("train")) {
    Section sec(*s, "train");
    sec.read("lr", c.train.lr);
    sec.read("batch_size", c.train.batch_size);
    sec.read("max_epochs", c.train.max_epochs);
    sec.read("max_steps", c.train.max_steps);
    sec.read("patience", c.train.patience);
    sec.read("mlm_prob", c.train.mlm_prob);
    sec.read("frozen_encoder", c.train.frozen_encoder);
    sec.finish();
  }
  if (const auto* s = top.child("ablation")) {
    Section sec(*s, "ablation");
    sec.read("use_minhash", c.ablation.use_minhash);
    sec.read("use_numerical", c.ablation.use_numerical);
    sec.read("use_snapshot", c.ablation.use_snapshot);
    sec.read("random_pt", c.ablation.random_pt);
    sec.read("mlp_mode", c.ablation.mlp_mode);
    sec.finish();
  }
  top.finish();
  if (c.sketch.num_perm == 0) throw InvalidArgument("sketch.num_perm must be positive");
  c.train.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("invalid config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, base);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw Error("sha256 failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string file_sha256(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

json to_json(const RunRecord& r) {
  const auto config = to_json(r.config);
  json inputs = json::array();
  for (const auto& p : r.inputs) inputs.push_back({{"path", p.string()}, {"sha256", file_sha256(p)}});
  json outputs = json::array();
  for (const auto& p : r.outputs) outputs.push_back(p.string());
  return {{"command", r.command},
          {"version", kVersion},
          {"config", config},
          {"config_hash", sha256_hex(config.dump())},
          {"inputs", inputs},
          {"outputs", outputs},
          {"extra", r.extra}};
}

void write_run_record(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(record).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lakesketch
