#include "hipool/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hipool/errors.hpp"

namespace hipool {

std::vector<Example> prepare_examples(const LabeledCorpus& corpus, const Vocabulary& vocab, const ChunkingOptions& opts) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const Document& doc : corpus.documents) {
    std::vector<TokenId> ids = tokenize(doc.text, vocab);
    if (opts.max_tokens != 0 && ids.size() > opts.max_tokens) ids.resize(opts.max_tokens);
    out.push_back({doc.id, cap_chunks(chunk(ids, opts.length, opts.overlap), opts.max_node), doc.label});
  }
  return out;
}

std::vector<Example> prepare_examples(const LabeledCorpus& corpus, const ExternalEmbeddings& embeddings,
                                      std::size_t max_node) {
  if (max_node < 1) throw ConfigError("max_node must be at least 1");
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const Document& doc : corpus.documents) {
    auto it = embeddings.docs.find(doc.id);
    if (it == embeddings.docs.end()) throw SchemaError("no external embeddings for document '" + doc.id + "'");
    const Tensor& src = it->second;
    Tensor x = Tensor::zeros(max_node, embeddings.dim);
    for (std::size_t i = 0; i < std::min(max_node, src.rows()); ++i) {
      for (std::size_t j = 0; j < embeddings.dim; ++j) x.at(i, j) = src.at(i, j);
    }
    out.push_back({doc.id, std::move(x), doc.label});
  }
  return out;
}

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t = Tensor::zeros(rows, cols);
  for (double& v : t.values()) v = dist(rng);
  t.set_requires_grad(true);
  return t;
}

Tensor zero_row(std::size_t cols) {
  Tensor t = Tensor::zeros(1, cols);
  t.set_requires_grad(true);
  return t;
}

void expect_shape(const Tensor& t, std::size_t rows, std::size_t cols, const std::string& name) {
  if (t.rows() != rows || t.cols() != cols || t.empty()) {
    throw SchemaError("parameter " + name + " has shape " + shape_to_string(t.shape()) + ", expected [" +
                      std::to_string(rows) + "x" + std::to_string(cols) + "]");
  }
}

std::size_t layer_count(const ModelConfig& config) {
  return config.encoder.aggregator == Aggregator::kSimple ? 0 : config.encoder.num_layers;
}

}  // namespace

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  const std::size_t d = config_.dim;
  if (d < 1) throw ConfigError("model dimension must be at least 1");
  if (config_.num_classes < 2) throw ConfigError("classifier needs at least 2 classes");
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  std::mt19937_64 rng(seed);
  if (config_.vocab_size > 0) params_.embedding = uniform_matrix(config_.vocab_size, d, bound, rng);
  if (config_.chunk_ffn) {
    params_.ffn_weight = uniform_matrix(d, d, bound, rng);
    params_.ffn_bias = zero_row(d);
  }
  for (std::size_t l = 0; l < layer_count(config_); ++l) {
    HiPoolLayerParams layer;
    layer.attention = uniform_matrix(d, d, bound, rng);
    layer.gcn = uniform_matrix(d, d, bound, rng);
    params_.layers.push_back(std::move(layer));
  }
  params_.head.weight = uniform_matrix(d, config_.num_classes, bound, rng);
  params_.head.bias = zero_row(config_.num_classes);
}

Model::Model(ModelConfig config, ModelParams params) : config_(std::move(config)), params_(std::move(params)) {
  validate();
  for (Tensor* t : parameters()) t->set_requires_grad(true);
}

void Model::validate() const {
  const std::size_t d = config_.dim;
  if (config_.num_classes < 2) throw SchemaError("classifier needs at least 2 classes");
  if (config_.vocab_size > 0) {
    expect_shape(params_.embedding, config_.vocab_size, d, "embedding");
  } else if (!params_.embedding.empty()) {
    throw SchemaError("embedding table present but vocab_size is 0");
  }
  if (config_.chunk_ffn) {
    expect_shape(params_.ffn_weight, d, d, "chunk_ffn.weight");
    expect_shape(params_.ffn_bias, 1, d, "chunk_ffn.bias");
  }
  if (params_.layers.size() != layer_count(config_)) {
    throw SchemaError("expected " + std::to_string(layer_count(config_)) + " pooling layers, got " +
                      std::to_string(params_.layers.size()));
  }
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    expect_shape(params_.layers[l].attention, d, d, "layer" + std::to_string(l) + ".attention");
    expect_shape(params_.layers[l].gcn, d, d, "layer" + std::to_string(l) + ".gcn");
  }
  expect_shape(params_.head.weight, d, config_.num_classes, "head.weight");
  expect_shape(params_.head.bias, 1, config_.num_classes, "head.bias");
}

std::vector<NamedTensor> Model::named_parameters() {
  std::vector<NamedTensor> out;
  if (!params_.embedding.empty()) out.emplace_back("embedding", &params_.embedding);
  if (config_.chunk_ffn) {
    out.emplace_back("chunk_ffn.weight", &params_.ffn_weight);
    out.emplace_back("chunk_ffn.bias", &params_.ffn_bias);
  }
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    out.emplace_back("layer" + std::to_string(l) + ".attention", &params_.layers[l].attention);
    out.emplace_back("layer" + std::to_string(l) + ".gcn", &params_.layers[l].gcn);
  }
  out.emplace_back("head.weight", &params_.head.weight);
  out.emplace_back("head.bias", &params_.head.bias);
  return out;
}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

Model::Bound Model::bind(Tape& tape) {
  Bound b;
  if (!params_.embedding.empty()) b.embedding = tape.parameter(params_.embedding);
  if (config_.chunk_ffn) {
    b.ffn_weight = tape.parameter(params_.ffn_weight);
    b.ffn_bias = tape.parameter(params_.ffn_bias);
  }
  for (HiPoolLayerParams& layer : params_.layers) b.layers.push_back(bind_layer(tape, layer));
  b.head_weight = tape.parameter(params_.head.weight);
  b.head_bias = tape.parameter(params_.head.bias);
  return b;
}

Model::Bound Model::bind_frozen(Tape& tape) const {
  Bound b;
  if (!params_.embedding.empty()) b.embedding = tape.view(params_.embedding);
  if (config_.chunk_ffn) {
    b.ffn_weight = tape.view(params_.ffn_weight);
    b.ffn_bias = tape.view(params_.ffn_bias);
  }
  for (const HiPoolLayerParams& layer : params_.layers) b.layers.push_back({tape.view(layer.attention), tape.view(layer.gcn)});
  b.head_weight = tape.view(params_.head.weight);
  b.head_bias = tape.view(params_.head.bias);
  return b;
}

Var Model::chunk_embeddings(Tape& tape, const Bound& bound, const Example& ex) const {
  Var x;
  if (const auto* chunks = std::get_if<ChunkSequence>(&ex.input)) {
    if (!bound.embedding.valid()) throw ConfigError("model has no embedding table for token input");
    x = embed_chunks(tape, *chunks, bound.embedding);
  } else {
    const Tensor& external = std::get<Tensor>(ex.input);
    if (external.cols() != config_.dim) {
      throw DimensionError("external chunk embeddings have dimension " + std::to_string(external.cols()) +
                           ", model expects " + std::to_string(config_.dim));
    }
    x = tape.view(external);
  }
  if (config_.chunk_ffn) x = chunk_feed_forward(tape, x, bound.ffn_weight, bound.ffn_bias);
  return x;
}

Var Model::document_vector(Tape& tape, const Bound& bound, const Example& ex) const {
  return encode(tape, chunk_embeddings(tape, bound, ex), config_.encoder, bound.layers);
}

Var Model::logits(Tape& tape, const Bound& bound, const Example& ex) const {
  const Var doc = document_vector(tape, bound, ex);
  return tape.add(tape.matmul(doc, bound.head_weight), bound.head_bias);
}

Var Model::loss(Tape& tape, const Bound& bound, const Example& ex) const {
  return tape.cross_entropy(logits(tape, bound, ex), ex.label);
}

std::vector<double> Model::predict_logits(const Example& ex) const {
  Tape tape;
  const Bound b = bind_frozen(tape);
  const Tensor& z = tape.value(logits(tape, b, ex));
  return {z.values().begin(), z.values().end()};
}

std::size_t Model::predict(const Example& ex) const {
  const std::vector<double> z = predict_logits(ex);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

}  // namespace hipool
