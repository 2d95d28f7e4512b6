#include "hipool/graph_builder.hpp"

#include <cmath>
#include <string>

#include "hipool/errors.hpp"

namespace hipool {

LowAdjacency parse_low_adjacency(std::string_view name) {
  if (name == "chain") return LowAdjacency::kChain;
  if (name == "complete") return LowAdjacency::kComplete;
  throw ConfigError("unknown low-level adjacency '" + std::string(name) + "' (expected chain or complete)");
}

std::string_view to_string(LowAdjacency mode) { return mode == LowAdjacency::kChain ? "chain" : "complete"; }

ChainAdjacency build_chain(std::size_t n) {
  if (n < 1) throw DomainError("build_chain: node count must be at least 1");
  ChainAdjacency chain{n, Tensor::zeros(n, n)};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    chain.matrix.at(i, i + 1) = 1.0;
    chain.matrix.at(i + 1, i) = 1.0;
  }
  return chain;
}

Tensor build_complete(std::size_t n) {
  if (n < 1) throw DomainError("build_complete: node count must be at least 1");
  Tensor a = Tensor::ones(n, n);
  for (std::size_t i = 0; i < n; ++i) a.at(i, i) = 0.0;
  return a;
}

Tensor build_low_adjacency(std::size_t n, LowAdjacency mode) {
  return mode == LowAdjacency::kChain ? build_chain(n).matrix : build_complete(n);
}

ClusterAssignment build_clusters(std::size_t n, std::size_t p) {
  if (n < 1) throw DomainError("build_clusters: node count must be at least 1");
  if (p < 1) throw DomainError("build_clusters: stride p must be at least 1");
  const std::size_t m = (n + p - 1) / p;
  ClusterAssignment s{n, m, p, Tensor::zeros(n, m)};
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t first = j * p;
    for (std::size_t i = first; i < first + 2 * p && i < n; ++i) s.matrix.at(i, j) = 1.0;
  }
  return s;
}

CrossMask build_cross_mask(const ClusterAssignment& a) {
  CrossMask mask{Tensor({a.matrix.rows(), a.matrix.cols()}, 0.0)};
  for (std::size_t i = 0; i < a.matrix.size(); ++i) mask.matrix[i] = 1.0 - a.matrix[i];
  return mask;
}

Tensor lift_adjacency(const Tensor& a, const ClusterAssignment& s) {
  if (a.rows() != a.cols()) throw DimensionError("lift_adjacency: adjacency " + shape_to_string(a.shape()) + " is not square");
  if (a.rows() != s.matrix.rows()) {
    throw DimensionError("lift_adjacency: adjacency " + shape_to_string(a.shape()) + " does not match assignment " +
                         shape_to_string(s.matrix.shape()));
  }
  return dense_matmul(dense_transpose(s.matrix), dense_matmul(a, s.matrix));
}

Tensor gcn_normalize(const Tensor& a) {
  if (a.rows() != a.cols()) throw DimensionError("gcn_normalize: adjacency " + shape_to_string(a.shape()) + " is not square");
  const std::size_t n = a.rows();
  Tensor out = a;
  for (double v : a.values()) {
    if (v < 0.0) throw DomainError("gcn_normalize: adjacency has a negative entry");
  }
  for (std::size_t i = 0; i < n; ++i) out.at(i, i) += 1.0;
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += out.at(i, j);
    inv_sqrt[i] = 1.0 / std::sqrt(degree);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) *= inv_sqrt[i] * inv_sqrt[j];
  }
  return out;
}

}  // namespace hipool
