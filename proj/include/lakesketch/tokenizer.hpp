#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lakesketch/table.hpp"

namespace lakesketch {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kClsId = 1;
inline constexpr TokenId kSepId = 2;
inline constexpr TokenId kMaskId = 3;
inline constexpr TokenId kUnkId = 4;
inline constexpr std::size_t kReservedTokens = 5;

/// Word-level vocabulary with the reserved ids [PAD] [CLS] [SEP] [MASK] [UNK].
class Vocabulary {
 public:
  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// Table-level text the encoder reads: description, column names and types.
struct TableMetadata {
  std::string description;
  std::vector<std::string> column_names;
  std::vector<ColumnType> column_types;

  static TableMetadata of(const Table& table);
};

/// Vocabulary over the description and column-name words of a corpus,
/// ordered by frequency (descending) then lexicographically.
Vocabulary build_vocab(std::span<const TableMetadata> corpus);
Vocabulary build_vocab(std::span<const Table> corpus);

/// Where one segment of the input string lives. Column 0 is the description
/// segment; it starts at the leading [CLS] (or [SEP] for a second table).
struct TokenSpan {
  int table = 0;
  int column = 0;
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive; includes the trailing [SEP]
  std::size_t name_begin = 0;
  std::size_t name_end = 0;  // name tokens only
};

/// [CLS] description [SEP] col1 [SEP] col2 [SEP] ...
struct InputString {
  std::vector<TokenId> token_ids;
  std::vector<std::int32_t> token_positions;
  std::vector<std::int32_t> column_positions;
  std::vector<std::int32_t> column_types;  // 0 for description tokens
  std::vector<TokenSpan> spans;
  std::size_t columns_kept = 0;

  std::size_t size() const { return token_ids.size(); }
};

/// Encodes metadata, dropping whole trailing columns (then description
/// tokens) until the sequence fits in max_seq_len. At most max_columns
/// columns are kept.
InputString encode_metadata(const TableMetadata& table, const Vocabulary& vocab,
                            std::size_t max_seq_len, std::size_t max_columns = SIZE_MAX);
InputString encode_table(const Table& table, const Vocabulary& vocab, std::size_t max_seq_len);

/// Pair layout for cross-encoding:
/// [CLS] A-desc [SEP] A-cols... [SEP] B-desc [SEP] B-cols...
/// B's segment opens with [SEP] in place of [CLS]. When too long, B's
/// trailing columns are dropped first, then A's, then description tokens.
InputString encode_pair_metadata(const TableMetadata& a, const TableMetadata& b,
                                 const Vocabulary& vocab, std::size_t max_seq_len,
                                 std::size_t max_columns = SIZE_MAX);

}  // namespace lakesketch
