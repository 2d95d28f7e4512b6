#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hipool/tensor.hpp"

namespace hipool {

// Handle to a value recorded on a Tape. Only meaningful for the tape that issued it.
struct Var {
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  std::size_t index = kInvalid;

  bool valid() const { return index != kInvalid; }
};

enum class ElementwiseOp { kAdd, kSub, kMul, kRelu };
enum class ReduceOp { kRowSum, kColSum, kColMean, kColStd };

// Smoothing added under the square root of ReduceOp::kColStd.
inline constexpr double kStdSmoothing = 1e-12;

// Records a forward computation and replays it backwards.
//
// Every operation appends one node holding its output value and a backward
// rule. backward() walks the nodes in reverse recording order exactly once and
// accumulates (adds) into the grad buffer of every bound parameter tensor.
// Parameters are bound by pointer, so they must outlive the tape and must not
// be modified while it is in use.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Constant input; never receives a gradient.
  Var input(Tensor value);
  // Read-only reference to a tensor that outlives the tape; never receives a gradient.
  Var view(const Tensor& value);
  // Binds a trainable tensor. Gradients flow into it only if requires_grad() is set.
  Var parameter(Tensor& param);

  const Tensor& value(Var v) const;
  // Gradient of the last backward() target with respect to v; empty if v was unreached.
  std::span<const double> grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var elementwise(ElementwiseOp op, Var a, std::optional<Var> b = std::nullopt);
  Var add(Var a, Var b) { return elementwise(ElementwiseOp::kAdd, a, b); }
  Var sub(Var a, Var b) { return elementwise(ElementwiseOp::kSub, a, b); }
  Var mul(Var a, Var b) { return elementwise(ElementwiseOp::kMul, a, b); }
  Var relu(Var a) { return elementwise(ElementwiseOp::kRelu, a); }
  Var scale(Var a, double factor);
  Var reduce(ReduceOp op, Var a);
  // Sum of every entry, as a 1x1 tensor.
  Var sum(Var a);

  // Row-wise softmax restricted to positions where mask is 1; rows without
  // any such position come out all-zero.
  Var masked_row_softmax(Var scores, const Tensor& mask);
  // Row i is the mean of the table rows listed in rows[i].
  Var gather_mean(Var table, const std::vector<std::vector<std::size_t>>& rows);
  // -log softmax(logits)[label] for a 1 x C logits row, max-shifted.
  Var cross_entropy(Var logits, std::size_t label);

  // Seeds d(loss)/d(loss) = 1 and runs every backward rule in reverse order.
  void backward(Var loss);

 private:
  using BackwardRule = std::function<void(Tape&, std::size_t)>;

  struct Node {
    Tensor value;
    const Tensor* bound = nullptr;
    Tensor* param = nullptr;
    bool needs_grad = false;
    std::vector<double> grad;
    BackwardRule backward;
  };

  const Node& node(Var v) const;
  Var push(Tensor value, bool needs_grad, BackwardRule rule);
  bool needs_grad(Var v) const { return nodes_[v.index].needs_grad; }
  const Tensor& val(std::size_t i) const;
  std::vector<double>& grad_slot(std::size_t i);

  std::vector<Node> nodes_;
};

}  // namespace hipool
