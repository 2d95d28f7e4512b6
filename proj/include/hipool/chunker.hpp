#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hipool {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;

inline constexpr std::size_t kDefaultChunkLength = 300;
inline constexpr std::size_t kDefaultOverlap = 150;

// Lowercased words split on ASCII whitespace and punctuation; punctuation is dropped.
std::vector<std::string> split_words(std::string_view text);

// Token -> id map with PAD = 0 and UNK = 1 reserved. Frozen after construction.
class Vocabulary {
 public:
  // Only the reserved entries.
  Vocabulary();
  // Ids 2, 3, ... assigned in the given order; duplicates and reserved names are rejected.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  // Ranks words by descending frequency then lexicographically. Words seen
  // fewer than min_count times are left out; max_size caps the total size
  // including the reserved ids (0 means unlimited).
  static Vocabulary build(const std::vector<std::string>& texts, std::size_t min_count = 1,
                          std::size_t max_size = 0);

  // One token per line; line k (0-based) holds id k + 2.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  TokenId lookup(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab);

struct ChunkSequence {
  std::vector<std::vector<TokenId>> chunks;
  std::size_t length = 0;   // tokens per chunk
  std::size_t overlap = 0;  // tokens shared by consecutive chunks
  std::size_t n_real = 0;   // non-PAD source tokens

  std::size_t size() const { return chunks.size(); }
};

// Windows of `length` tokens starting every (length - overlap) tokens until a
// start reaches the end of the input; the last window is PAD-completed and an
// empty input yields a single all-PAD chunk. Throws ConfigError unless
// 0 <= overlap < length.
ChunkSequence chunk(const std::vector<TokenId>& tokens, std::size_t length, std::size_t overlap);

// Keeps the first max_node chunks and appends all-PAD chunks up to max_node.
ChunkSequence cap_chunks(const ChunkSequence& cs, std::size_t max_node);

// 1 + ceil(max(0, T - length) / (length - overlap)) for T > 0, otherwise 1.
std::size_t expected_chunk_count(std::size_t token_count, std::size_t length, std::size_t overlap);

}  // namespace hipool
