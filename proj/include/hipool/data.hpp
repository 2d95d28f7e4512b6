#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hipool {

struct Document {
  std::string id;
  std::string text;
  std::size_t label = 0;

  friend bool operator==(const Document&, const Document&) = default;
};

struct LabeledCorpus {
  std::string name;
  std::size_t class_count = 0;
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
};

// Reads line-delimited {"id"?: string, "text": string, "label": int} records.
// Missing ids become the 1-based line number. When class_count is not given it
// is inferred as max label + 1. Blank lines are skipped.
// FormatError (with line number) for malformed records; SchemaError for a
// label >= class_count or a duplicate id.
LabeledCorpus load_corpus(const std::filesystem::path& path, std::optional<std::size_t> class_count = std::nullopt);
void save_corpus(const std::filesystem::path& path, const LabeledCorpus& corpus);

// Token-length statistics in the layout of a dataset-statistics table.
struct CorpusStats {
  double mean = 0.0;
  std::size_t max = 0;
  std::size_t min = 0;
  std::size_t median = 0;  // lower-middle element for even counts
  std::size_t p95 = 0;     // nearest rank: the ceil(0.95 N)-th smallest
  std::size_t total = 0;
  std::size_t class_count = 0;
};

std::size_t token_length(const std::string& text);
CorpusStats stats_from_lengths(std::vector<std::size_t> lengths, std::size_t class_count);
// Throws DomainError on an empty corpus.
CorpusStats stats(const LabeledCorpus& corpus);
std::string format_stats_report(const CorpusStats& s);
std::string stats_to_json(const CorpusStats& s, const std::string& corpus_name);

// Keeps documents strictly longer than min_tokens.
LabeledCorpus filter_by_length(const LabeledCorpus& corpus, std::size_t min_tokens);

struct CorpusSplit {
  LabeledCorpus train;
  LabeledCorpus dev;
  LabeledCorpus test;
  std::vector<std::string> warnings;  // one per empty partition
};

// Seeded shuffle then contiguous cut. Dev and test get round(N * ratio)
// documents, train the remainder. Ratios must sum to 1 within 1e-9.
CorpusSplit split(const LabeledCorpus& corpus, const std::array<double, 3>& ratios, std::uint64_t seed);

// Number of distinct filler words in synthetic documents.
inline constexpr std::size_t kSynthFillerWords = 24;

// Marker word for slot 0 (early half) or slot 1 (late half) carrying `value`.
std::string synth_marker(int slot, std::size_t value);

// Documents of chunks_per_doc * chunk_len filler words with two planted
// markers: value a in the first floor(chunks_per_doc / 2) segments of
// chunk_len words, value b at least chunk_len words later in the remaining
// segments. The label is (a + b) mod n_classes and labels are assigned
// round-robin, so the classes are balanced within one document. Since the
// markers are chunk_len or more words apart, no window of chunk_len words
// holds both, and neither marker alone carries any information about the label.
LabeledCorpus synth_longrange(std::size_t n_docs, std::size_t n_classes, std::size_t chunks_per_doc,
                              std::size_t chunk_len, std::uint64_t seed);

}  // namespace hipool
