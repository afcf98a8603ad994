#include "qctc/numeric/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qctc {

namespace {

double evaluate(const LossBuilder& loss) {
  Tape tape(false);
  Var out = loss(tape);
  if (out.value().size() != 1) throw std::invalid_argument("grad_check: loss is not a scalar");
  return out.value()[0];
}

}  // namespace

GradCheckResult grad_check(const LossBuilder& loss, std::span<Parameter* const> params, double h) {
  if (!(h >= 1e-6 && h <= 1e-4)) throw std::invalid_argument("grad_check: step must lie in [1e-6, 1e-4]");

  const double first = evaluate(loss);
  const double second = evaluate(loss);
  if (first != second) throw std::invalid_argument("grad_check: loss is not deterministic");

  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var out = loss(tape);
    tape.backward(out);
    tape.flush_parameter_grads();
  }

  GradCheckResult result;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = evaluate(loss);
      p->value[i] = saved - h;
      const double down = evaluate(loss);
      p->value[i] = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic - numeric) / denom;
      ++result.components;
      if (result.worst_parameter.empty() || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p->name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace qctc
