#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ambiprobe/numcore/tape.hpp"

namespace ambiprobe {

// Builds a scalar loss on `tape` from leaves bound to the given parameters.
using LossBuilder = std::function<ad::Var(ad::Tape& tape, std::span<const ad::Var> params)>;
// Plain evaluation of the same loss.
using LossValue = std::function<double(std::span<const Matrix> params)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  Index worst_index = 0;
};

// Relative error used by the checker: |a - n| / max(|a| + |n|, floor).
// The floor keeps finite-difference rounding on near-zero entries from
// dominating.
inline constexpr double kGradCheckFloor = 1e-6;

// Compares `analytic` against central differences (f(p+h) - f(p-h)) / 2h of
// `value`, entry by entry, and reports the worst relative error.
GradCheckResult compare_gradients(const LossValue& value, std::span<const Matrix> analytic,
                                  std::vector<Matrix> params, double h);

// Differentiates `build` on a tape and checks it against finite differences
// of the same builder evaluated forward-only.
GradCheckResult grad_check(const LossBuilder& build, std::span<const Matrix> params,
                           double h = 1e-5);

// Analytic gradients of `build` at `params`.
std::vector<Matrix> tape_gradients(const LossBuilder& build, std::span<const Matrix> params);

}  // namespace ambiprobe
