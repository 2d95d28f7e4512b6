#include "hipool/chunker.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "hipool/errors.hpp"

namespace hipool {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc) || std::ispunct(uc)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) : Vocabulary() {
  for (const std::string& t : tokens) {
    if (t.empty()) throw FormatError("vocabulary: empty token");
    if (index_.count(t) != 0) throw FormatError("vocabulary: duplicate token '" + t + "'");
    add(t);
  }
}

void Vocabulary::add(std::string token) {
  const auto id = static_cast<TokenId>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t min_count, std::size_t max_size) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& text : texts) {
    for (std::string& w : split_words(text)) ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens;
  for (auto& [word, count] : ranked) {
    if (count < min_count) break;
    if (max_size != 0 && tokens.size() + 2 >= max_size) break;
    if (word == "<pad>" || word == "<unk>") continue;
    tokens.push_back(word);
  }
  return Vocabulary(tokens);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw FormatError("vocabulary: empty token", line_no);
    tokens.push_back(line);
  }
  return Vocabulary(tokens);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write vocabulary file " + path.string());
  for (std::size_t id = 2; id < tokens_.size(); ++id) out << tokens_[id] << '\n';
}

TokenId Vocabulary::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const std::string& w : split_words(text)) ids.push_back(vocab.lookup(w));
  return ids;
}

std::size_t expected_chunk_count(std::size_t token_count, std::size_t length, std::size_t overlap) {
  if (token_count == 0) return 1;
  const std::size_t stride = length - overlap;
  const std::size_t excess = token_count > length ? token_count - length : 0;
  return 1 + (excess + stride - 1) / stride;
}

ChunkSequence chunk(const std::vector<TokenId>& tokens, std::size_t length, std::size_t overlap) {
  if (length < 1) throw ConfigError("chunk length must be at least 1");
  if (overlap >= length) {
    throw ConfigError("overlap (" + std::to_string(overlap) + ") must be smaller than chunk length (" +
                      std::to_string(length) + ")");
  }
  ChunkSequence cs;
  cs.length = length;
  cs.overlap = overlap;
  cs.n_real = static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](TokenId t) { return t != kPadId; }));

  const std::size_t stride = length - overlap;
  std::size_t start = 0;
  do {
    std::vector<TokenId> window(length, kPadId);
    const std::size_t end = std::min(start + length, tokens.size());
    if (start < end) std::copy(tokens.begin() + static_cast<std::ptrdiff_t>(start), tokens.begin() + static_cast<std::ptrdiff_t>(end), window.begin());
    cs.chunks.push_back(std::move(window));
    if (start + length >= tokens.size()) break;
    start += stride;
  } while (true);
  return cs;
}

ChunkSequence cap_chunks(const ChunkSequence& cs, std::size_t max_node) {
  if (max_node < 1) throw ConfigError("max_node must be at least 1");
  ChunkSequence out;
  out.length = cs.length;
  out.overlap = cs.overlap;
  const std::size_t keep = std::min(max_node, cs.chunks.size());
  out.chunks.assign(cs.chunks.begin(), cs.chunks.begin() + static_cast<std::ptrdiff_t>(keep));
  while (out.chunks.size() < max_node) out.chunks.emplace_back(cs.length, kPadId);
  // Non-PAD positions that survive, counted once per source position.
  if (keep == cs.chunks.size()) {
    out.n_real = cs.n_real;
  } else {
    const std::size_t stride = cs.length - cs.overlap;
    std::size_t real = 0;
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t fresh_from = i == 0 ? 0 : cs.length - stride;
      for (std::size_t k = fresh_from; k < cs.length; ++k) real += out.chunks[i][k] != kPadId ? 1 : 0;
    }
    out.n_real = real;
  }
  return out;
}

}  // namespace hipool
