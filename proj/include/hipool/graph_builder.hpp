#pragma once

#include <cstddef>
#include <string_view>

#include "hipool/tensor.hpp"

namespace hipool {

// Low-level adjacency between consecutive chunks.
enum class LowAdjacency { kChain, kComplete };

LowAdjacency parse_low_adjacency(std::string_view name);
std::string_view to_string(LowAdjacency mode);

// Path graph over n nodes: entry (i, j) is 1 iff |i - j| = 1.
struct ChainAdjacency {
  std::size_t n = 0;
  Tensor matrix;
};

// Binary n x m map from low-level nodes to cluster nodes. Cluster j covers
// node indices [j*p, j*p + 2p - 1] clipped to [0, n - 1]; m = ceil(n / p).
struct ClusterAssignment {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t stride = 0;
  Tensor matrix;
};

// Entrywise complement of a ClusterAssignment.
struct CrossMask {
  Tensor matrix;
};

ChainAdjacency build_chain(std::size_t n);
// All-ones minus the diagonal.
Tensor build_complete(std::size_t n);
Tensor build_low_adjacency(std::size_t n, LowAdjacency mode);

ClusterAssignment build_clusters(std::size_t n, std::size_t p);
CrossMask build_cross_mask(const ClusterAssignment& a);

// S^T A S. Kept real-valued: entries may exceed 1 and the diagonal may be nonzero.
Tensor lift_adjacency(const Tensor& a, const ClusterAssignment& s);

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
Tensor gcn_normalize(const Tensor& a);

}  // namespace hipool
