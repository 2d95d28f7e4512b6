#include "hipool/encoder.hpp"

#include <string>

#include "hipool/errors.hpp"

namespace hipool {

Aggregator parse_aggregator(std::string_view name) {
  if (name == "sum") return Aggregator::kSum;
  if (name == "mean") return Aggregator::kMean;
  if (name == "std") return Aggregator::kStd;
  if (name == "simple") return Aggregator::kSimple;
  throw ConfigError("unknown aggregator '" + std::string(name) + "' (expected sum, mean, std or simple)");
}

std::string_view to_string(Aggregator mode) {
  switch (mode) {
    case Aggregator::kSum: return "sum";
    case Aggregator::kMean: return "mean";
    case Aggregator::kStd: return "std";
    case Aggregator::kSimple: return "simple";
  }
  return "sum";
}

LayerVars bind_layer(Tape& tape, HiPoolLayerParams& params) {
  return {tape.parameter(params.attention), tape.parameter(params.gcn)};
}

Var pool_nodes(Tape& tape, const ClusterAssignment& s, Var h) {
  const Tensor& hv = tape.value(h);
  if (hv.rows() != s.matrix.rows()) {
    throw DimensionError("pool_nodes: assignment " + shape_to_string(s.matrix.shape()) + " does not match nodes " +
                         shape_to_string(hv.shape()));
  }
  return tape.matmul(tape.input(dense_transpose(s.matrix)), h);
}

Var cross_attention(Tape& tape, Var h, Var h_high, const CrossMask& mask, Var w_atten, bool softmax) {
  const Tensor& hv = tape.value(h);
  const Tensor& hh = tape.value(h_high);
  const Tensor& w = tape.value(w_atten);
  if (mask.matrix.rows() != hv.rows() || mask.matrix.cols() != hh.rows()) {
    throw DimensionError("cross_attention: mask " + shape_to_string(mask.matrix.shape()) + " does not match " +
                         shape_to_string(hv.shape()) + " low and " + shape_to_string(hh.shape()) + " high nodes");
  }
  if (hv.cols() != hh.cols() || w.rows() != hv.cols() || w.cols() != hv.cols()) {
    throw DimensionError("cross_attention: feature dimensions disagree (" + shape_to_string(hv.shape()) + ", " +
                         shape_to_string(hh.shape()) + ", W " + shape_to_string(w.shape()) + ")");
  }
  const Var scores = tape.matmul(tape.matmul(h_high, w_atten), tape.transpose(h));
  Tensor mask_t = dense_transpose(mask.matrix);
  const Var weights =
      softmax ? tape.masked_row_softmax(scores, mask_t) : tape.mul(scores, tape.input(std::move(mask_t)));
  return tape.add(tape.matmul(weights, h), h_high);
}

LayerOutput hipool_layer(Tape& tape, Var h, const Tensor& adjacency, const EncoderConfig& cfg, const LayerVars& params) {
  const std::size_t n = tape.value(h).rows();
  if (n < 1) throw DomainError("hipool_layer: no input nodes");
  const ClusterAssignment s = build_clusters(n, cfg.stride);
  const CrossMask mask = build_cross_mask(s);

  Var high = pool_nodes(tape, s, h);
  high = cross_attention(tape, h, high, mask, params.attention, cfg.attention_softmax);

  Tensor lifted = lift_adjacency(adjacency, s);
  const Var norm = tape.input(gcn_normalize(lifted));
  const Var out = tape.relu(tape.matmul(tape.matmul(norm, high), params.gcn));
  return {out, std::move(lifted)};
}

Var aggregate(Tape& tape, Var h, Aggregator mode) {
  switch (mode) {
    case Aggregator::kMean: return tape.reduce(ReduceOp::kColMean, h);
    case Aggregator::kStd: return tape.reduce(ReduceOp::kColStd, h);
    default: return tape.reduce(ReduceOp::kColSum, h);
  }
}

Var simple_baseline(Tape& tape, Var h) { return tape.reduce(ReduceOp::kColSum, h); }

Var encode(Tape& tape, Var chunk_embeddings, const EncoderConfig& cfg, std::span<const LayerVars> layers) {
  if (cfg.aggregator == Aggregator::kSimple) return simple_baseline(tape, chunk_embeddings);
  if (cfg.num_layers < 1) throw ConfigError("encode: num_layers must be at least 1");
  if (layers.size() != cfg.num_layers) {
    throw ConfigError("encode: expected " + std::to_string(cfg.num_layers) + " layer parameter sets, got " +
                      std::to_string(layers.size()));
  }
  Var h = chunk_embeddings;
  Tensor adjacency = build_low_adjacency(tape.value(h).rows(), cfg.low_adjacency);
  for (const LayerVars& layer : layers) {
    LayerOutput next = hipool_layer(tape, h, adjacency, cfg, layer);
    h = next.nodes;
    adjacency = std::move(next.adjacency);
  }
  return aggregate(tape, h, cfg.aggregator);
}

std::vector<std::size_t> node_schedule(std::size_t n, const EncoderConfig& cfg) {
  std::vector<std::size_t> counts{n};
  for (std::size_t t = 0; t < cfg.num_layers; ++t) counts.push_back((counts.back() + cfg.stride - 1) / cfg.stride);
  return counts;
}

}  // namespace hipool
