#include "lakesketch/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "json.hpp"
#include "lakesketch/errors.hpp"
#include "lakesketch/sketch.hpp"

namespace lakesketch {

namespace {

const std::vector<std::string>& reserved_tokens() {
  static const std::vector<std::string> tokens = {"[PAD]", "[CLS]", "[SEP]", "[MASK]", "[UNK]"};
  return tokens;
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(reserved_tokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kReservedTokens ||
      !std::equal(reserved_tokens().begin(), reserved_tokens().end(), tokens_.begin())) {
    throw FormatError("vocabulary must start with the reserved tokens");
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError("duplicate vocabulary token: " + tokens_[i]);
    }
  }
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << nlohmann::json{{"tokens", tokens_}}.dump() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed vocabulary " + path.string() + ": " + e.what());
  }
}

TableMetadata TableMetadata::of(const Table& table) {
  TableMetadata meta;
  meta.description = table.description;
  for (const auto& c : table.columns) {
    meta.column_names.push_back(c.name);
    meta.column_types.push_back(c.type);
  }
  return meta;
}

Vocabulary build_vocab(std::span<const TableMetadata> corpus) {
  if (corpus.empty()) throw InvalidArgument("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  auto count = [&](std::string_view text) {
    for (auto& w : word_tokens(text)) ++counts[std::move(w)];
  };
  for (const auto& table : corpus) {
    count(table.description);
    for (const auto& name : table.column_names) count(name);
  }
  std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  auto tokens = reserved_tokens();
  for (auto& entry : ordered) tokens.push_back(std::move(entry.first));
  return Vocabulary(std::move(tokens));
}

Vocabulary build_vocab(std::span<const Table> corpus) {
  std::vector<TableMetadata> meta;
  meta.reserve(corpus.size());
  for (const auto& t : corpus) meta.push_back(TableMetadata::of(t));
  return build_vocab(std::span<const TableMetadata>(meta));
}

namespace {

struct TokenizedTable {
  std::vector<TokenId> description;
  std::vector<std::vector<TokenId>> columns;
  std::vector<std::int32_t> types;

  std::size_t length() const {
    std::size_t n = 2 + description.size();
    for (const auto& c : columns) n += c.size() + 1;
    return n;
  }
};

TokenizedTable tokenize(const TableMetadata& meta, const Vocabulary& vocab, std::size_t max_columns) {
  TokenizedTable out;
  for (const auto& w : word_tokens(meta.description)) out.description.push_back(vocab.id(w));
  const auto n = std::min(meta.column_names.size(), max_columns);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<TokenId> ids;
    for (const auto& w : word_tokens(meta.column_names[c])) ids.push_back(vocab.id(w));
    out.columns.push_back(std::move(ids));
    out.types.push_back(c < meta.column_types.size() ? static_cast<std::int32_t>(meta.column_types[c])
                                                     : static_cast<std::int32_t>(ColumnType::String));
  }
  return out;
}

// Shrinks the tables (last one first) until their combined layout fits.
void fit(std::span<TokenizedTable*> tables, std::size_t max_seq_len) {
  auto total = [&] {
    std::size_t n = 0;
    for (auto* t : tables) n += t->length();
    return n;
  };
  for (auto it = tables.rbegin(); it != tables.rend() && total() > max_seq_len; ++it) {
    auto& t = **it;
    while (!t.columns.empty() && total() > max_seq_len) {
      t.columns.pop_back();
      t.types.pop_back();
    }
  }
  for (auto it = tables.rbegin(); it != tables.rend() && total() > max_seq_len; ++it) {
    auto& t = **it;
    const auto excess = total() - max_seq_len;
    t.description.resize(t.description.size() - std::min(excess, t.description.size()));
  }
  if (total() > max_seq_len) throw InvalidArgument("max_seq_len too small for the input layout");
}

void append(InputString& out, const TokenizedTable& t, int table_index, TokenId leading) {
  auto push = [&](TokenId id, std::int32_t tpos, std::int32_t cpos, std::int32_t ctype) {
    out.token_ids.push_back(id);
    out.token_positions.push_back(tpos);
    out.column_positions.push_back(cpos);
    out.column_types.push_back(ctype);
  };
  TokenSpan desc{table_index, 0, out.size(), 0, 0, 0};
  push(leading, 0, 0, 0);
  desc.name_begin = out.size();
  for (std::size_t i = 0; i < t.description.size(); ++i) {
    push(t.description[i], static_cast<std::int32_t>(i + 1), 0, 0);
  }
  desc.name_end = out.size();
  push(kSepId, static_cast<std::int32_t>(t.description.size() + 1), 0, 0);
  desc.end = out.size();
  out.spans.push_back(desc);

  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    const auto cpos = static_cast<std::int32_t>(c + 1);
    TokenSpan span{table_index, cpos, out.size(), 0, out.size(), 0};
    const auto& ids = t.columns[c];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      push(ids[i], static_cast<std::int32_t>(i), cpos, t.types[c]);
    }
    span.name_end = out.size();
    push(kSepId, static_cast<std::int32_t>(ids.size()), cpos, t.types[c]);
    span.end = out.size();
    out.spans.push_back(span);
  }
}

}  // namespace

InputString encode_metadata(const TableMetadata& table, const Vocabulary& vocab,
                            std::size_t max_seq_len, std::size_t max_columns) {
  if (max_seq_len < 8) throw InvalidArgument("max_seq_len must be at least 8");
  auto t = tokenize(table, vocab, max_columns);
  TokenizedTable* tables[] = {&t};
  fit(tables, max_seq_len);
  InputString out;
  append(out, t, 0, kClsId);
  out.columns_kept = t.columns.size();
  return out;
}

InputString encode_table(const Table& table, const Vocabulary& vocab, std::size_t max_seq_len) {
  return encode_metadata(TableMetadata::of(table), vocab, max_seq_len);
}

InputString encode_pair_metadata(const TableMetadata& a, const TableMetadata& b,
                                 const Vocabulary& vocab, std::size_t max_seq_len,
                                 std::size_t max_columns) {
  if (max_seq_len < 8) throw InvalidArgument("max_seq_len must be at least 8");
  auto ta = tokenize(a, vocab, max_columns);
  auto tb = tokenize(b, vocab, max_columns);
  TokenizedTable* tables[] = {&ta, &tb};
  fit(tables, max_seq_len);
  InputString out;
  append(out, ta, 0, kClsId);
  append(out, tb, 1, kSepId);
  out.columns_kept = ta.columns.size();
  return out;
}

}  // namespace lakesketch
