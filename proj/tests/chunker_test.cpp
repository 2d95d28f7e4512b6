#include <gtest/gtest.h>

#include <random>

#include "hipool/chunker.hpp"
#include "hipool/errors.hpp"
#include "support.hpp"

namespace hipool {
namespace {

std::vector<TokenId> iota_tokens(std::size_t n, TokenId first = 10) {
  std::vector<TokenId> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = first + static_cast<TokenId>(i);
  return t;
}

TEST(SplitWords, LowercasesAndDropsPunctuation) {
  EXPECT_EQ(split_words("Hello, world"), (std::vector<std::string>{"hello", "world"}));
  EXPECT_EQ(split_words("  a\tB\n\nc--d's "), (std::vector<std::string>{"a", "b", "c", "d", "s"}));
  EXPECT_TRUE(split_words("").empty());
  EXPECT_TRUE(split_words(" .,; ").empty());
}

TEST(Tokenize, Examples) {
  const Vocabulary vocab({"the"});
  EXPECT_TRUE(tokenize("", vocab).empty());
  EXPECT_EQ(tokenize("the the", vocab), (std::vector<TokenId>{2, 2}));
  const Vocabulary hello({"hello"});
  EXPECT_EQ(tokenize("Hello, world", hello), (std::vector<TokenId>{2, kUnkId}));
}

TEST(Vocabulary, ReservedIds) {
  const Vocabulary v;
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.lookup("<pad>"), kPadId);
  EXPECT_EQ(v.lookup("anything"), kUnkId);
  EXPECT_THROW(Vocabulary({"a", "a"}), FormatError);
}

TEST(Vocabulary, BuildRanksByFrequencyThenAlphabet) {
  const Vocabulary v = Vocabulary::build({"b a c", "c b", "c d"});
  // c:3, b:2, then a and d tied at 1.
  EXPECT_EQ(v.token(2), "c");
  EXPECT_EQ(v.token(3), "b");
  EXPECT_EQ(v.token(4), "a");
  EXPECT_EQ(v.token(5), "d");
  EXPECT_EQ(Vocabulary::build({"b a c", "c b", "c d"}, 2).size(), 4u);
  EXPECT_EQ(Vocabulary::build({"b a c", "c b", "c d"}, 1, 3).size(), 3u);
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  testing::TempDir dir("vocab");
  const Vocabulary v = Vocabulary::build({"x y z y"});
  v.save(dir / "v.txt");
  EXPECT_EQ(Vocabulary::load(dir / "v.txt"), v);
}

TEST(Chunk, OverlappingWindows) {
  const std::vector<TokenId> t = iota_tokens(7);
  const ChunkSequence cs = chunk(t, 4, 2);
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(cs.chunks[0], (std::vector<TokenId>{10, 11, 12, 13}));
  EXPECT_EQ(cs.chunks[1], (std::vector<TokenId>{12, 13, 14, 15}));
  EXPECT_EQ(cs.chunks[2], (std::vector<TokenId>{14, 15, 16, kPadId}));
  EXPECT_EQ(cs.n_real, 7u);
}

TEST(Chunk, SingleWindow) {
  const ChunkSequence cs = chunk(iota_tokens(4), 4, 2);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs.chunks[0], iota_tokens(4));
}

TEST(Chunk, EmptyInputGivesOnePadChunk) {
  const ChunkSequence cs = chunk({}, 3, 1);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs.chunks[0], (std::vector<TokenId>(3, kPadId)));
}

TEST(Chunk, RejectsOverlapNotBelowLength) {
  EXPECT_THROW(chunk(iota_tokens(5), 4, 4), ConfigError);
  EXPECT_THROW(chunk(iota_tokens(5), 4, 7), ConfigError);
  EXPECT_THROW(chunk(iota_tokens(5), 0, 0), ConfigError);
}

// Enumerates window starts 0, s, 2s, ... directly and compares every window.
TEST(Chunk, MatchesStrideEnumeration) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = 1 + rng() % 12;
    const std::size_t olp = rng() % len;
    const std::size_t n = rng() % 60;
    const std::vector<TokenId> t = iota_tokens(n);
    const ChunkSequence cs = chunk(t, len, olp);
    const std::size_t stride = len - olp;

    std::vector<std::vector<TokenId>> oracle;
    for (std::size_t start = 0;; start += stride) {
      std::vector<TokenId> w;
      for (std::size_t k = 0; k < len; ++k) w.push_back(start + k < n ? t[start + k] : kPadId);
      oracle.push_back(w);
      if (start + len >= n) break;
    }
    ASSERT_EQ(cs.chunks, oracle) << "n=" << n << " L=" << len << " olp=" << olp;
    ASSERT_EQ(cs.size(), expected_chunk_count(n, len, olp));
    // Every source token appears in some window.
    std::vector<bool> seen(n, false);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      for (std::size_t k = 0; k < len && i * stride + k < n; ++k) seen[i * stride + k] = true;
    }
    for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(seen[i]);
  }
}

TEST(ChunkCount, DefaultWindowArithmetic) {
  EXPECT_EQ(expected_chunk_count(0, kDefaultChunkLength, kDefaultOverlap), 1u);
  EXPECT_EQ(expected_chunk_count(300, kDefaultChunkLength, kDefaultOverlap), 1u);
  EXPECT_EQ(expected_chunk_count(301, kDefaultChunkLength, kDefaultOverlap), 2u);
  EXPECT_EQ(expected_chunk_count(1500, kDefaultChunkLength, kDefaultOverlap), 9u);
}

TEST(CapChunks, TruncatesHead) {
  const ChunkSequence cs = chunk(iota_tokens(7), 4, 2);
  const ChunkSequence capped = cap_chunks(cs, 2);
  ASSERT_EQ(capped.size(), 2u);
  EXPECT_EQ(capped.chunks[0], cs.chunks[0]);
  EXPECT_EQ(capped.chunks[1], cs.chunks[1]);
  EXPECT_EQ(capped.n_real, 6u);
}

TEST(CapChunks, PadsWithEmptyChunks) {
  const ChunkSequence capped = cap_chunks(chunk(iota_tokens(3), 4, 2), 4);
  ASSERT_EQ(capped.size(), 4u);
  EXPECT_EQ(capped.chunks[0], (std::vector<TokenId>{10, 11, 12, kPadId}));
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(capped.chunks[i], (std::vector<TokenId>(4, kPadId)));
  EXPECT_EQ(capped.n_real, 3u);
  EXPECT_THROW(cap_chunks(capped, 0), ConfigError);
}

}  // namespace
}  // namespace hipool
