#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ambiprobe/numcore/tensor.hpp"

namespace ambiprobe {

// Trainable matrix with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
inline Matrix init_uniform_fan_in(Index rows, Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix m(rows, fan_in);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = uniform(rng, -bound, bound);
  }
  return m;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Matrix m;
  Matrix v;
  std::int64_t step = 0;
};

// One bias-corrected Adam update:
//   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2,
//   p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, const AdamConfig& config);

// Adam over a fixed set of parameters, reading Parameter::grad.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config);

  void step();
  void zero_grad();

  double learning_rate() const noexcept { return config_.learning_rate; }
  void set_learning_rate(double lr) noexcept { config_.learning_rate = lr; }
  const std::vector<AdamState>& states() const noexcept { return states_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<AdamState> states_;
  AdamConfig config_;
};

// Scales the global gradient norm down to `max_norm`; returns the norm
// before clipping. max_norm <= 0 disables clipping.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

// Learning-rate schedule: multiply by `factor` whenever the monitored loss
// fails to improve on its best value for `patience` consecutive epochs.
class PlateauDecay {
 public:
  explicit PlateauDecay(double factor = 0.5, int patience = 1)
      : factor_(factor), patience_(patience) {}

  // Returns the multiplier to apply to the learning rate (1 or factor).
  double observe(double loss);

 private:
  double factor_;
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
};

}  // namespace ambiprobe
