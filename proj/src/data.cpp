#include "hipool/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hipool/chunker.hpp"
#include "hipool/errors.hpp"

namespace hipool {

using nlohmann::json;

LabeledCorpus load_corpus(const std::filesystem::path& path, std::optional<std::size_t> class_count) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open corpus file " + path.string());
  LabeledCorpus corpus;
  corpus.name = path.stem().string();
  std::set<std::string> seen;
  std::size_t max_label = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw FormatError("record is not an object", line_no);
    if (!record.contains("text") || !record["text"].is_string()) throw FormatError("missing string field \"text\"", line_no);
    if (!record.contains("label")) throw FormatError("missing field \"label\"", line_no);
    const json& label = record["label"];
    if (!label.is_number_unsigned()) {
      throw FormatError("\"label\" must be a non-negative integer", line_no);
    }
    Document doc;
    if (record.contains("id")) {
      if (!record["id"].is_string()) throw FormatError("\"id\" must be a string", line_no);
      doc.id = record["id"].get<std::string>();
    } else {
      doc.id = std::to_string(line_no);
    }
    doc.text = record["text"].get<std::string>();
    doc.label = label.get<std::size_t>();
    if (class_count && doc.label >= *class_count) {
      throw SchemaError("line " + std::to_string(line_no) + ": label " + std::to_string(doc.label) +
                        " >= class count " + std::to_string(*class_count));
    }
    if (!seen.insert(doc.id).second) throw SchemaError("line " + std::to_string(line_no) + ": duplicate id '" + doc.id + "'");
    max_label = std::max(max_label, doc.label);
    corpus.documents.push_back(std::move(doc));
  }
  corpus.class_count = class_count ? *class_count : (corpus.documents.empty() ? 0 : max_label + 1);
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const LabeledCorpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write corpus file " + path.string());
  for (const Document& doc : corpus.documents) {
    out << json{{"id", doc.id}, {"text", doc.text}, {"label", doc.label}}.dump() << '\n';
  }
}

std::size_t token_length(const std::string& text) { return split_words(text).size(); }

CorpusStats stats_from_lengths(std::vector<std::size_t> lengths, std::size_t class_count) {
  if (lengths.empty()) throw DomainError("stats: empty corpus");
  std::sort(lengths.begin(), lengths.end());
  const std::size_t n = lengths.size();
  CorpusStats s;
  s.total = n;
  s.class_count = class_count;
  s.min = lengths.front();
  s.max = lengths.back();
  s.median = lengths[(n - 1) / 2];
  s.p95 = lengths[(95 * n + 99) / 100 - 1];
  const double sum = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  s.mean = sum / static_cast<double>(n);
  return s;
}

CorpusStats stats(const LabeledCorpus& corpus) {
  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.size());
  for (const Document& doc : corpus.documents) lengths.push_back(token_length(doc.text));
  return stats_from_lengths(std::move(lengths), corpus.class_count);
}

std::string format_stats_report(const CorpusStats& s) {
  std::ostringstream out;
  out << std::left;
  out << std::setw(8) << "" << "tokens per document\n";
  out << std::setw(8) << "Mean" << std::fixed << std::setprecision(2) << s.mean << '\n';
  out << std::setw(8) << "Max" << s.max << '\n';
  out << std::setw(8) << "Min" << s.min << '\n';
  out << std::setw(8) << "Med." << s.median << '\n';
  out << std::setw(8) << "95pt." << s.p95 << '\n';
  out << std::setw(8) << "Total" << s.total << '\n';
  out << std::setw(8) << "Class" << s.class_count << '\n';
  return out.str();
}

std::string stats_to_json(const CorpusStats& s, const std::string& corpus_name) {
  const nlohmann::ordered_json j = {{"corpus", corpus_name}, {"unit", "tokens"},  {"mean", s.mean},
                                    {"max", s.max},          {"min", s.min},       {"median", s.median},
                                    {"p95", s.p95},          {"total", s.total},   {"class_count", s.class_count}};
  return j.dump();
}

LabeledCorpus filter_by_length(const LabeledCorpus& corpus, std::size_t min_tokens) {
  LabeledCorpus out{corpus.name, corpus.class_count, {}};
  for (const Document& doc : corpus.documents) {
    if (token_length(doc.text) > min_tokens) out.documents.push_back(doc);
  }
  return out;
}

CorpusSplit split(const LabeledCorpus& corpus, const std::array<double, 3>& ratios, std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("split: ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw ConfigError("split: ratios must sum to 1");

  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_dev = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[1]));
  const auto n_test = std::min(n - std::min(n, n_dev), static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[2])));
  const std::size_t dev_count = std::min(n, n_dev);
  const std::size_t n_train = n - dev_count - n_test;

  CorpusSplit out;
  out.train = {corpus.name + "-train", corpus.class_count, {}};
  out.dev = {corpus.name + "-dev", corpus.class_count, {}};
  out.test = {corpus.name + "-test", corpus.class_count, {}};
  for (std::size_t k = 0; k < n; ++k) {
    const Document& doc = corpus.documents[order[k]];
    if (k < n_train) {
      out.train.documents.push_back(doc);
    } else if (k < n_train + dev_count) {
      out.dev.documents.push_back(doc);
    } else {
      out.test.documents.push_back(doc);
    }
  }
  for (const LabeledCorpus* part : {&out.train, &out.dev, &out.test}) {
    if (part->empty()) out.warnings.push_back("partition " + part->name + " is empty");
  }
  return out;
}

std::string synth_marker(int slot, std::size_t value) {
  return std::string(slot == 0 ? "ka" : "kb") + std::to_string(value);
}

LabeledCorpus synth_longrange(std::size_t n_docs, std::size_t n_classes, std::size_t chunks_per_doc,
                              std::size_t chunk_len, std::uint64_t seed) {
  if (n_docs < 1) throw DomainError("synth_longrange: n_docs must be at least 1");
  if (n_classes < 2) throw DomainError("synth_longrange: n_classes must be at least 2");
  if (chunks_per_doc < 2) throw DomainError("synth_longrange: chunks_per_doc must be at least 2");
  if (chunk_len < 1) throw DomainError("synth_longrange: chunk_len must be at least 1");

  const std::size_t total = chunks_per_doc * chunk_len;
  const std::size_t half = (chunks_per_doc / 2) * chunk_len;
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](std::size_t lo, std::size_t hi) {  // inclusive range
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  LabeledCorpus corpus{"synth-longrange", n_classes, {}};
  corpus.documents.reserve(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    const std::size_t label = d % n_classes;
    const std::size_t a = uniform(0, n_classes - 1);
    const std::size_t b = (label + n_classes - a) % n_classes;
    const std::size_t pos_a = uniform(0, half - 1);
    const std::size_t pos_b = uniform(std::max(half, pos_a + chunk_len), total - 1);

    std::string text;
    for (std::size_t i = 0; i < total; ++i) {
      if (i > 0) text.push_back(' ');
      if (i == pos_a) {
        text += synth_marker(0, a);
      } else if (i == pos_b) {
        text += synth_marker(1, b);
      } else {
        text += "w" + std::to_string(uniform(0, kSynthFillerWords - 1));
      }
    }
    std::ostringstream id;
    id << "synth-" << std::setw(6) << std::setfill('0') << d;
    corpus.documents.push_back({id.str(), std::move(text), label});
  }
  return corpus;
}

}  // namespace hipool
