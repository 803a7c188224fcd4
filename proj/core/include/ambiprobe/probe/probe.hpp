#pragma once

#include <string>
#include <string_view>

#include "ambiprobe/numcore/adam.hpp"
#include "ambiprobe/numcore/tape.hpp"
#include "ambiprobe/states/extract.hpp"

namespace ambiprobe::probe {

enum class ProbeTask { Word, Sub, WordSub };

// "WORD", "SUB", "WORD_SUB".
const char* to_string(ProbeTask task) noexcept;
// Accepts the names above, case-insensitively; throws ConfigError otherwise.
ProbeTask parse_task(std::string_view text);

// Identifies the state slice a probe reads and the target it predicts.
struct ProbeBinding {
  ProbeTask task = ProbeTask::Word;
  states::StateKind kind = states::StateKind::Current;
  // 1-based layer.
  std::uint32_t layer = 1;

  // e.g. "current-1-WORD".
  std::string name() const;
  bool operator==(const ProbeBinding&) const = default;
};

// r = tanh(W i + b), W of shape output_dim x input_dim.
class ProbeModel {
 public:
  ProbeModel(ProbeBinding binding, std::size_t input_dim, std::size_t output_dim, Rng& rng);
  ProbeModel(ProbeBinding binding, Parameter weight, Parameter bias);

  const ProbeBinding& binding() const noexcept { return binding_; }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(weight_.value.cols()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(weight_.value.rows()); }

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  const Parameter& weight() const noexcept { return weight_; }
  const Parameter& bias() const noexcept { return bias_; }

  // Columns of `inputs` are examples. Throws DimensionError on a row count
  // other than input_dim().
  Matrix forward(const Matrix& inputs) const;
  Vector forward(const Vector& input) const;

 private:
  ProbeBinding binding_;
  Parameter weight_;
  Parameter bias_;
};

// Differentiable probe map on a tape.
ad::Var probe_forward(ad::Var weight, ad::Var bias, ad::Var inputs);

// 1 - cos(r_hat, r) for a positive, max(0, cos(r_hat, r) - margin) for a
// negative. Throws UndefinedSimilarityError on a zero-norm argument.
double max_margin_loss(const Vector& r_hat, const Vector& r, bool positive, double margin);

// Mean over the batch of the per-positive loss
//   (1 - cos(r_hat, r)) + mean_k max(0, cos(r_hat, n_k) - margin).
// `outputs` and `positives` are dim x B; each entry of `negatives` is one
// dim x B matrix holding the k-th negative of every example.
ad::Var batch_loss(ad::Var outputs, ad::Var positives, std::span<const ad::Var> negatives,
                   double margin);

}  // namespace ambiprobe::probe
