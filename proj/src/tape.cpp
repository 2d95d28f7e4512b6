#include "hipool/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hipool/errors.hpp"

namespace hipool {

namespace {

#ifdef HIPOOL_CORRUPT_BACKWARD
// Negative-control build: a wrong matmul backward rule that grad_check must catch.
constexpr double kMatmulGradFactor = 1.5;
#else
constexpr double kMatmulGradFactor = 1.0;
#endif

}  // namespace

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.index >= nodes_.size()) throw DomainError("tape: invalid variable handle");
  return nodes_[v.index];
}

const Tensor& Tape::val(std::size_t i) const {
  const Node& n = nodes_[i];
  return n.bound != nullptr ? *n.bound : n.value;
}

std::vector<double>& Tape::grad_slot(std::size_t i) {
  Node& n = nodes_[i];
  if (n.grad.empty()) n.grad.assign(val(i).size(), 0.0);
  return n.grad;
}

const Tensor& Tape::value(Var v) const {
  node(v);
  return val(v.index);
}

std::span<const double> Tape::grad(Var v) const { return node(v).grad; }

Var Tape::push(Tensor value, bool needs_grad, BackwardRule rule) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backward = std::move(rule);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::input(Tensor value) { return push(std::move(value), false, nullptr); }

Var Tape::view(const Tensor& value) {
  Node n;
  n.bound = &value;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(Tensor& param) {
  Node n;
  n.bound = &param;
  n.param = &param;
  n.needs_grad = param.requires_grad();
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  if (x.cols() != y.rows()) {
    throw DimensionError("matmul: cannot multiply " + shape_to_string(x.shape()) + " by " +
                         shape_to_string(y.shape()));
  }
  const std::size_t ia = a.index, ib = b.index;
  return push(dense_matmul(x, y), needs_grad(a) || needs_grad(b), [ia, ib](Tape& t, std::size_t self) {
    const Tensor& x = t.val(ia);
    const Tensor& y = t.val(ib);
    const std::vector<double>& g = t.nodes_[self].grad;
    const std::size_t r = x.rows(), k = x.cols(), c = y.cols();
    if (t.nodes_[ia].needs_grad) {
      // dA = dC * B^T
      std::vector<double>& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < c; ++j) acc += g[i * c + j] * y.at(p, j);
          ga[i * k + p] += kMatmulGradFactor * acc;
        }
      }
    }
    if (t.nodes_[ib].needs_grad) {
      // dB = A^T * dC
      std::vector<double>& gb = t.grad_slot(ib);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double xv = x.at(i, p);
          if (xv == 0.0) continue;
          for (std::size_t j = 0; j < c; ++j) gb[p * c + j] += xv * g[i * c + j];
        }
      }
    }
  });
}

Var Tape::transpose(Var a) {
  const std::size_t ia = a.index;
  return push(dense_transpose(value(a)), needs_grad(a), [ia](Tape& t, std::size_t self) {
    const Tensor& x = t.val(ia);
    const std::vector<double>& g = t.nodes_[self].grad;
    std::vector<double>& ga = t.grad_slot(ia);
    const std::size_t r = x.rows(), c = x.cols();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
    }
  });
}

Var Tape::elementwise(ElementwiseOp op, Var a, std::optional<Var> b) {
  const Tensor& x = value(a);
  if (op == ElementwiseOp::kRelu) {
    Tensor out({x.rows(), x.cols()}, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    const std::size_t ia = a.index;
    return push(std::move(out), needs_grad(a), [ia](Tape& t, std::size_t self) {
      const Tensor& x = t.val(ia);
      const std::vector<double>& g = t.nodes_[self].grad;
      std::vector<double>& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) ga[i] += g[i];
      }
    });
  }
  if (!b) throw DomainError("elementwise: binary operation needs a second operand");
  const Tensor& y = value(*b);
  const char* name = op == ElementwiseOp::kAdd ? "add" : op == ElementwiseOp::kSub ? "sub" : "mul";
  require_same_shape(x, y, name);
  Tensor out({x.rows(), x.cols()}, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (op) {
      case ElementwiseOp::kAdd: out[i] = x[i] + y[i]; break;
      case ElementwiseOp::kSub: out[i] = x[i] - y[i]; break;
      default: out[i] = x[i] * y[i]; break;
    }
  }
  const std::size_t ia = a.index, ib = b->index;
  return push(std::move(out), needs_grad(a) || needs_grad(*b), [op, ia, ib](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.nodes_[self].grad;
    if (t.nodes_[ia].needs_grad) {
      std::vector<double>& ga = t.grad_slot(ia);
      if (op == ElementwiseOp::kMul) {
        const Tensor& y = t.val(ib);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
    }
    if (t.nodes_[ib].needs_grad) {
      std::vector<double>& gb = t.grad_slot(ib);
      if (op == ElementwiseOp::kMul) {
        const Tensor& x = t.val(ia);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
      } else if (op == ElementwiseOp::kSub) {
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    }
  });
}

Var Tape::scale(Var a, double factor) {
  const Tensor& x = value(a);
  Tensor out({x.rows(), x.cols()}, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * factor;
  const std::size_t ia = a.index;
  return push(std::move(out), needs_grad(a), [ia, factor](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.nodes_[self].grad;
    std::vector<double>& ga = t.grad_slot(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
  });
}

Var Tape::reduce(ReduceOp op, Var a) {
  const Tensor& x = value(a);
  if (x.empty()) throw DomainError("reduce: empty tensor");
  const std::size_t r = x.rows(), c = x.cols();
  const std::size_t ia = a.index;

  if (op == ReduceOp::kRowSum) {
    Tensor out = Tensor::zeros(r, 1);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) out[i] += x.at(i, j);
    }
    return push(std::move(out), needs_grad(a), [ia, r, c](Tape& t, std::size_t self) {
      const std::vector<double>& g = t.nodes_[self].grad;
      std::vector<double>& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[i];
      }
    });
  }

  Tensor sums = Tensor::zeros(1, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) sums[j] += x.at(i, j);
  }
  if (op == ReduceOp::kColSum || op == ReduceOp::kColMean) {
    const double factor = op == ReduceOp::kColMean ? 1.0 / static_cast<double>(r) : 1.0;
    for (double& v : sums.values()) v *= factor;
    return push(std::move(sums), needs_grad(a), [ia, r, c, factor](Tape& t, std::size_t self) {
      const std::vector<double>& g = t.nodes_[self].grad;
      std::vector<double>& ga = t.grad_slot(ia);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j] * factor;
      }
    });
  }

  // Population standard deviation, smoothed so the derivative exists at zero variance.
  const double n = static_cast<double>(r);
  std::vector<double> mean(c);
  for (std::size_t j = 0; j < c; ++j) mean[j] = sums[j] / n;
  Tensor out = Tensor::zeros(1, c);
  for (std::size_t j = 0; j < c; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      const double d = x.at(i, j) - mean[j];
      ss += d * d;
    }
    out[j] = std::sqrt(ss / n + kStdSmoothing);
  }
  return push(std::move(out), needs_grad(a), [ia, r, c, n, mean](Tape& t, std::size_t self) {
    const Tensor& x = t.val(ia);
    const Tensor& s = t.val(self);
    const std::vector<double>& g = t.nodes_[self].grad;
    std::vector<double>& ga = t.grad_slot(ia);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j] * (x.at(i, j) - mean[j]) / (n * s[j]);
    }
  });
}

Var Tape::sum(Var a) {
  const Tensor& x = value(a);
  double total = 0.0;
  for (double v : x.values()) total += v;
  const std::size_t ia = a.index;
  return push(Tensor({1, 1}, total), needs_grad(a), [ia](Tape& t, std::size_t self) {
    const double g = t.nodes_[self].grad[0];
    for (double& v : t.grad_slot(ia)) v += g;
  });
}

Var Tape::masked_row_softmax(Var scores, const Tensor& mask) {
  const Tensor& x = value(scores);
  require_same_shape(x, mask, "masked_row_softmax");
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out = Tensor::zeros(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) {
      if (mask.at(i, j) != 0.0) peak = std::max(peak, x.at(i, j));
    }
    if (!std::isfinite(peak)) continue;
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (mask.at(i, j) != 0.0) {
        out.at(i, j) = std::exp(x.at(i, j) - peak);
        z += out.at(i, j);
      }
    }
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= z;
  }
  const std::size_t ia = scores.index;
  return push(std::move(out), needs_grad(scores), [ia, r, c](Tape& t, std::size_t self) {
    const Tensor& y = t.val(self);
    const std::vector<double>& g = t.nodes_[self].grad;
    std::vector<double>& ga = t.grad_slot(ia);
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += y.at(i, j) * g[i * c + j];
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += y.at(i, j) * (g[i * c + j] - dot);
    }
  });
}

Var Tape::gather_mean(Var table, const std::vector<std::vector<std::size_t>>& rows) {
  const Tensor& tab = value(table);
  if (rows.empty()) throw DomainError("gather_mean: no rows requested");
  const std::size_t d = tab.cols();
  Tensor out = Tensor::zeros(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].empty()) throw DomainError("gather_mean: row " + std::to_string(i) + " lists no indices");
    const double inv = 1.0 / static_cast<double>(rows[i].size());
    for (std::size_t id : rows[i]) {
      if (id >= tab.rows()) {
        throw DomainError("gather_mean: index " + std::to_string(id) + " out of range for table with " +
                          std::to_string(tab.rows()) + " rows");
      }
      for (std::size_t j = 0; j < d; ++j) out.at(i, j) += tab.at(id, j) * inv;
    }
  }
  const std::size_t ia = table.index;
  return push(std::move(out), needs_grad(table), [ia, rows, d](Tape& t, std::size_t self) {
    const std::vector<double>& g = t.nodes_[self].grad;
    std::vector<double>& ga = t.grad_slot(ia);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double inv = 1.0 / static_cast<double>(rows[i].size());
      for (std::size_t id : rows[i]) {
        for (std::size_t j = 0; j < d; ++j) ga[id * d + j] += g[i * d + j] * inv;
      }
    }
  });
}

Var Tape::cross_entropy(Var logits, std::size_t label) {
  const Tensor& z = value(logits);
  if (z.rows() != 1) throw DimensionError("cross_entropy: logits must be a single row, got " + shape_to_string(z.shape()));
  if (label >= z.cols()) {
    throw DomainError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                      std::to_string(z.cols()) + " classes");
  }
  const double peak = *std::max_element(z.values().begin(), z.values().end());
  double total = 0.0;
  for (double v : z.values()) total += std::exp(v - peak);
  const double log_z = peak + std::log(total);
  const std::size_t ia = logits.index;
  return push(Tensor({1, 1}, log_z - z[label]), needs_grad(logits), [ia, label, log_z](Tape& t, std::size_t self) {
    const Tensor& z = t.val(ia);
    const double g = t.nodes_[self].grad[0];
    std::vector<double>& ga = t.grad_slot(ia);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double prob = std::exp(z[j] - log_z);
      ga[j] += g * (prob - (j == label ? 1.0 : 0.0));
    }
  });
}

void Tape::backward(Var loss) {
  const Tensor& out = value(loss);
  if (out.size() != 1) throw DimensionError("backward: loss must be a scalar, got " + shape_to_string(out.shape()));
  for (Node& n : nodes_) n.grad.clear();
  grad_slot(loss.index)[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param != nullptr) {
      std::span<double> dst = n.param->grad();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
    }
  }
}

}  // namespace hipool
