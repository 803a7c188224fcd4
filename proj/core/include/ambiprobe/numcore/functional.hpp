#pragma once

#include <span>

#include "ambiprobe/numcore/tensor.hpp"

// Tape-free evaluation of the primitives, for inference and evaluation paths.
namespace ambiprobe::fn {

Vector affine(const Matrix& weight, const Vector& x, const Vector& bias);
Vector tanh(const Vector& x);
Vector sigmoid(const Vector& x);

// Max-subtracted softmax. Throws NumericDomainError on NaN/Inf, ContractError
// on empty input.
Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);

// u.v / (|u| |v|). Throws DimensionError on length mismatch and
// UndefinedSimilarityError when either norm is zero.
double cosine(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v);

// exp of the mean negative log-probability; 1 for a perfect model.
double perplexity_from_log_probs(std::span<const double> log_probs);

}  // namespace ambiprobe::fn
