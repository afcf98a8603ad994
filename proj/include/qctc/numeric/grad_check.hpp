#pragma once

#include <functional>
#include <span>
#include <string>

#include "qctc/numeric/tape.hpp"

namespace qctc {

// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t components = 0;
};

// Compares tape gradients against central differences (f(x+h) - f(x-h)) / 2h
// for every component of every parameter. Relative error uses the
// denominator max(|analytic|, |numeric|, 1e-8). Rejects a loss that does not
// evaluate bitwise-identically twice, and h outside [1e-6, 1e-4].
GradCheckResult grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           double h = 1e-5);

}  // namespace qctc
