#include "ambiprobe/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "ambiprobe/error.hpp"

namespace ambiprobe {

GradCheckResult compare_gradients(const LossValue& value, std::span<const Matrix> analytic,
                                  std::vector<Matrix> params, double h) {
  if (h <= 0.0) throw ContractError("grad_check: step must be positive");
  if (analytic.size() != params.size()) throw ContractError("grad_check: gradient count mismatch");
  GradCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (analytic[p].rows() != params[p].rows() || analytic[p].cols() != params[p].cols()) {
      throw DimensionError("grad_check: gradient " + shape_string(analytic[p]) + " for parameter " +
                           shape_string(params[p]));
    }
    for (Index i = 0; i < params[p].size(); ++i) {
      const double saved = params[p](i);
      params[p](i) = saved + h;
      const double up = value(params);
      params[p](i) = saved - h;
      const double down = value(params);
      params[p](i) = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[p](i);
      const double err =
          std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), kGradCheckFloor);
      if (err > result.max_relative_error) {
        result = {err, p, i};
      }
    }
  }
  return result;
}

std::vector<Matrix> tape_gradients(const LossBuilder& build, std::span<const Matrix> params) {
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(tape.variable(p));
  auto loss = build(tape, leaves);
  tape.backward(loss);
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (const auto& l : leaves) grads.push_back(tape.grad(l));
  return grads;
}

GradCheckResult grad_check(const LossBuilder& build, std::span<const Matrix> params, double h) {
  auto analytic = tape_gradients(build, params);
  LossValue value = [&build](std::span<const Matrix> ps) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    leaves.reserve(ps.size());
    for (const auto& p : ps) leaves.push_back(tape.constant(p));
    return build(tape, leaves).value()(0, 0);
  };
  return compare_gradients(value, analytic, std::vector<Matrix>(params.begin(), params.end()), h);
}

}  // namespace ambiprobe
