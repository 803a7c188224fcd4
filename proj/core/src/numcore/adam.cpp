#include "ambiprobe/numcore/adam.hpp"

#include <cmath>

#include "ambiprobe/error.hpp"

namespace ambiprobe {

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, const AdamConfig& config) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols()) {
    throw DimensionError("adam_step: gradient " + shape_string(grad) + " for parameter " +
                         shape_string(param));
  }
  if (state.m.size() == 0) {
    state.m = Matrix::Zero(param.rows(), param.cols());
    state.v = Matrix::Zero(param.rows(), param.cols());
  }
  state.step += 1;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  param.array() -= config.learning_rate * (state.m.array() / c1) /
                   ((state.v.array() / c2).sqrt() + config.epsilon);
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig config)
    : params_(std::move(params)), states_(params_.size()), config_(config) {}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_step(params_[i]->value, params_[i]->grad, states_[i], config_);
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto* p : params) p->grad *= s;
  }
  return norm;
}

double PlateauDecay::observe(double loss) {
  if (loss < best_) {
    best_ = loss;
    bad_epochs_ = 0;
    return 1.0;
  }
  if (++bad_epochs_ >= patience_) {
    bad_epochs_ = 0;
    return factor_;
  }
  return 1.0;
}

}  // namespace ambiprobe
