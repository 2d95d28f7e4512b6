#include "hipool/pipeline.hpp"

#include <algorithm>

#include "hipool/errors.hpp"

namespace hipool {

namespace {

std::size_t resolve_classes(const RunConfig& cfg, std::initializer_list<const LabeledCorpus*> corpora) {
  std::size_t needed = 0;
  for (const LabeledCorpus* c : corpora) {
    if (c == nullptr) continue;
    for (const Document& doc : c->documents) needed = std::max(needed, doc.label + 1);
  }
  if (cfg.num_classes == 0) return std::max<std::size_t>(needed, 2);
  if (needed > cfg.num_classes) {
    throw SchemaError("corpus labels need " + std::to_string(needed) + " classes but num_classes is " +
                      std::to_string(cfg.num_classes));
  }
  return cfg.num_classes;
}

}  // namespace

ExperimentData prepare_experiment(const RunConfig& cfg, const LabeledCorpus& train, const LabeledCorpus* dev,
                                  const LabeledCorpus* test, const Vocabulary* vocab) {
  if (train.empty()) throw DomainError("training corpus is empty");
  ExperimentData data;
  data.num_classes = resolve_classes(cfg, {&train, dev, test});
  if (!cfg.embeddings_path.empty()) {
    data.external = true;
    const ExternalEmbeddings ext = load_external(cfg.embeddings_path, cfg.dim);
    data.train = prepare_examples(train, ext, cfg.max_node);
    if (dev != nullptr) data.dev = prepare_examples(*dev, ext, cfg.max_node);
    if (test != nullptr) data.test = prepare_examples(*test, ext, cfg.max_node);
    return data;
  }
  if (vocab != nullptr) {
    data.vocab = *vocab;
  } else {
    std::vector<std::string> texts;
    texts.reserve(train.size());
    for (const Document& doc : train.documents) texts.push_back(doc.text);
    data.vocab = Vocabulary::build(texts, cfg.min_count, cfg.max_vocab);
  }
  const ChunkingOptions opts = chunking_options(cfg);
  data.train = prepare_examples(train, data.vocab, opts);
  if (dev != nullptr) data.dev = prepare_examples(*dev, data.vocab, opts);
  if (test != nullptr) data.test = prepare_examples(*test, data.vocab, opts);
  return data;
}

ExperimentData load_experiment(const RunConfig& cfg) {
  const LabeledCorpus train = load_corpus(cfg.train_path);
  std::optional<LabeledCorpus> dev, test;
  if (!cfg.dev_path.empty()) dev = load_corpus(cfg.dev_path);
  if (!cfg.test_path.empty()) test = load_corpus(cfg.test_path);
  return prepare_experiment(cfg, train, dev ? &*dev : nullptr, test ? &*test : nullptr);
}

RunOutcome run_experiment(const RunConfig& cfg, const ExperimentData& data, const EpochCallback& on_epoch) {
  const std::size_t vocab_size = data.external ? 0 : data.vocab.size();
  RunOutcome out{Model(model_config(cfg, vocab_size, data.num_classes), cfg.seed), {}, std::nullopt};
  out.result = train(out.model, data.train, data.dev, train_config(cfg), on_epoch);
  if (!data.test.empty()) out.test_f1 = evaluate(out.model, data.test).micro_f1;
  return out;
}

}  // namespace hipool
