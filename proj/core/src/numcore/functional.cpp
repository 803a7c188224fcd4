#include "ambiprobe/numcore/functional.hpp"

#include <cmath>

#include "ambiprobe/error.hpp"

namespace ambiprobe::fn {

Vector affine(const Matrix& weight, const Vector& x, const Vector& bias) {
  if (weight.cols() != x.size() || weight.rows() != bias.size()) {
    throw DimensionError("affine: W " + shape_string(weight) + ", x " + shape_string(x) + ", b " +
                         shape_string(bias) + " do not conform");
  }
  Vector out = bias;
  out.noalias() += weight * x;
  return out;
}

Vector tanh(const Vector& x) { return x.array().tanh().matrix(); }

Vector sigmoid(const Vector& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

Vector log_softmax(const Vector& logits) {
  if (logits.size() == 0) throw ContractError("softmax: empty input");
  if (!logits.allFinite()) throw NumericDomainError("softmax: non-finite input");
  double m = logits.maxCoeff();
  double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

Vector softmax(const Vector& logits) {
  if (logits.size() == 0) throw ContractError("softmax: empty input");
  if (!logits.allFinite()) throw NumericDomainError("softmax: non-finite input");
  Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

double cosine(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  if (u.size() != v.size()) {
    throw DimensionError("cosine: length " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  }
  double nu = u.norm();
  double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw UndefinedSimilarityError("cosine: zero-norm vector");
  return u.dot(v) / (nu * nv);
}

double perplexity_from_log_probs(std::span<const double> log_probs) {
  if (log_probs.empty()) throw ContractError("perplexity: no predictions");
  double total = 0.0;
  for (double lp : log_probs) total -= lp;
  return std::exp(total / static_cast<double>(log_probs.size()));
}

}  // namespace ambiprobe::fn
