#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "hipool/graph_builder.hpp"
#include "hipool/tape.hpp"

namespace hipool {

// Document-level readout. kSimple bypasses the graph layers and sums the chunk embeddings.
enum class Aggregator { kSum, kMean, kStd, kSimple };

Aggregator parse_aggregator(std::string_view name);
std::string_view to_string(Aggregator mode);

struct EncoderConfig {
  std::size_t stride = 2;  // cluster stride p; windows are 2p wide
  std::size_t num_layers = 2;
  Aggregator aggregator = Aggregator::kSum;
  LowAdjacency low_adjacency = LowAdjacency::kChain;
  // Softmax over out-of-cluster positions instead of raw masked scores.
  bool attention_softmax = false;
};

// Trainable weights of one pooling layer.
struct HiPoolLayerParams {
  Tensor attention;  // d_in x d_in
  Tensor gcn;        // d_in x d_out
};

struct LayerVars {
  Var attention;
  Var gcn;
};

LayerVars bind_layer(Tape& tape, HiPoolLayerParams& params);

// S^T H: each cluster node is the sum of its member nodes.
Var pool_nodes(Tape& tape, const ClusterAssignment& s, Var h);

// Cross-cluster update of the pooled nodes:
//   scores = H_high W H^T, masked by the transposed cross mask,
//   result = scores H + H_high.
Var cross_attention(Tape& tape, Var h, Var h_high, const CrossMask& mask, Var w_atten, bool softmax = false);

struct LayerOutput {
  Var nodes;
  Tensor adjacency;  // unnormalized lifted adjacency, input to the next layer
};

// One pooling layer: cluster, pool, cross-attend, lift the adjacency, then
// relu(norm(A_high) H_high W_gcn).
LayerOutput hipool_layer(Tape& tape, Var h, const Tensor& adjacency, const EncoderConfig& cfg, const LayerVars& params);

// Column-wise readout (sum, mean or population std). kSimple is treated as sum.
Var aggregate(Tape& tape, Var h, Aggregator mode);

Var simple_baseline(Tape& tape, Var h);

// Stacks num_layers pooling layers over the chain (or complete) graph of the
// chunk embeddings and aggregates; the simple aggregator skips the layers.
Var encode(Tape& tape, Var chunk_embeddings, const EncoderConfig& cfg, std::span<const LayerVars> layers);

// Node count after each layer: ceil(n / p^t) for t = 0..num_layers.
std::vector<std::size_t> node_schedule(std::size_t n, const EncoderConfig& cfg);

}  // namespace hipool
