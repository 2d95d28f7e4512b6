#include "hipool/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hipool/errors.hpp"

namespace hipool {

namespace {

double evaluate(const LossBuilder& loss_fn) {
  Tape tape;
  const double loss = tape.value(loss_fn(tape))[0];
  if (!std::isfinite(loss)) throw NumericError("grad_check: loss is not finite");
  return loss;
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss_fn, std::span<Tensor* const> params, double eps) {
  if (!(eps > 0.0 && eps <= 1e-2)) throw DomainError("grad_check: eps must lie in (0, 1e-2]");
  for (Tensor* p : params) {
    if (!p->all_finite()) throw DomainError("grad_check: parameter tensor holds non-finite values");
    p->set_requires_grad(true);
    p->zero_grad();
  }

  {
    Tape tape;
    const Var loss = loss_fn(tape);
    if (!std::isfinite(tape.value(loss)[0])) throw NumericError("grad_check: loss is not finite");
    tape.backward(loss);
  }

  GradCheckReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& p = *params[t];
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double up = evaluate(loss_fn);
      p[i] = saved - eps;
      const double down = evaluate(loss_fn);
      p[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      ++report.entries_checked;
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_tensor = t;
        report.worst_entry = i;
        report.worst_analytic = analytic[i];
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace hipool
