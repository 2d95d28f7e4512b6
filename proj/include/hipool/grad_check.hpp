#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "hipool/tape.hpp"

namespace hipool {

// Records a scalar loss on the given tape, reading the current values of the
// parameters it binds.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_tensor = 0;
  std::size_t worst_entry = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

// Compares tape gradients against central differences for every entry of
// every parameter tensor. Relative error uses max(|analytic|, |numeric|, 1e-8)
// as denominator. Parameter grad buffers are zeroed first and left holding the
// analytic gradient on return.
//
// Throws DomainError when eps is outside (0, 1e-2] or a parameter is
// non-finite, NumericError when any loss evaluation is non-finite.
GradCheckReport grad_check(const LossBuilder& loss_fn, std::span<Tensor* const> params, double eps);

}  // namespace hipool
