#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hipool/chunker.hpp"
#include "hipool/data.hpp"
#include "hipool/embedder.hpp"
#include "hipool/encoder.hpp"

namespace hipool {

struct ModelConfig {
  // Rows of the token embedding table; 0 when chunk vectors come from an external file.
  std::size_t vocab_size = 0;
  std::size_t dim = 32;
  std::size_t num_classes = 2;
  EncoderConfig encoder;
  // Adds relu(X W + b) after the mean-of-embeddings chunk encoder.
  bool chunk_ffn = false;
};

struct ClassifierHead {
  Tensor weight;  // dim x C
  Tensor bias;    // 1 x C
};

struct ModelParams {
  Tensor embedding;  // vocab_size x dim; empty for external inputs
  Tensor ffn_weight;
  Tensor ffn_bias;
  std::vector<HiPoolLayerParams> layers;
  ClassifierHead head;
};

using NamedTensor = std::pair<std::string, Tensor*>;

// One classification input: token chunks for the built-in encoder, or a
// ready chunk-embedding matrix.
struct Example {
  std::string id;
  std::variant<ChunkSequence, Tensor> input;
  std::size_t label = 0;
};

struct ChunkingOptions {
  std::size_t length = kDefaultChunkLength;
  std::size_t overlap = kDefaultOverlap;
  std::size_t max_node = 10;
  std::size_t max_tokens = 0;  // head truncation before chunking; 0 keeps everything
};

std::vector<Example> prepare_examples(const LabeledCorpus& corpus, const Vocabulary& vocab, const ChunkingOptions& opts);
// Rows beyond max_node are dropped and missing rows are zero-filled.
// Throws SchemaError when a document id has no entry.
std::vector<Example> prepare_examples(const LabeledCorpus& corpus, const ExternalEmbeddings& embeddings,
                                      std::size_t max_node);

class Model {
 public:
  // Weight matrices ~ uniform(-1/sqrt(dim), 1/sqrt(dim)), biases zero.
  Model(ModelConfig config, std::uint64_t seed);
  // Validates every tensor shape against the config (SchemaError on mismatch).
  Model(ModelConfig config, ModelParams params);

  const ModelConfig& config() const { return config_; }
  const ModelParams& params() const { return params_; }
  // Stable order and names; shared by optimizer, gradient check and checkpoints.
  std::vector<NamedTensor> named_parameters();
  std::vector<Tensor*> parameters();

  struct Bound {
    Var embedding;
    Var ffn_weight;
    Var ffn_bias;
    std::vector<LayerVars> layers;
    Var head_weight;
    Var head_bias;
  };

  // Trainable binding: gradients accumulate into the parameter tensors.
  Bound bind(Tape& tape);
  // Read-only binding for inference.
  Bound bind_frozen(Tape& tape) const;

  Var chunk_embeddings(Tape& tape, const Bound& bound, const Example& ex) const;
  Var document_vector(Tape& tape, const Bound& bound, const Example& ex) const;
  Var logits(Tape& tape, const Bound& bound, const Example& ex) const;
  Var loss(Tape& tape, const Bound& bound, const Example& ex) const;

  std::vector<double> predict_logits(const Example& ex) const;
  std::size_t predict(const Example& ex) const;

 private:
  void validate() const;

  ModelConfig config_;
  ModelParams params_;
};

}  // namespace hipool
