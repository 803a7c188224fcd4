#pragma once

#include <string>
#include <vector>

#include "ambiprobe/probe/probe.hpp"
#include "ambiprobe/probe/sampler.hpp"

namespace ambiprobe::probe {

struct ProbeTrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-4;
  // Negatives per positive.
  std::size_t negatives = 5;
  double margin = 0.0;
  std::size_t max_epochs = 100;
  // Epochs without a new best validation loss before stopping.
  std::size_t patience = 3;
  std::uint64_t seed = 1;

  // Throws ConfigError on k = 0, a margin outside [0, 1), a zero batch
  // size or a non-positive learning rate.
  void validate() const;
  std::string to_text() const;
  static ProbeTrainConfig from_text(std::string_view text);
  bool operator==(const ProbeTrainConfig&) const = default;
};

// Batch size and initial learning rate of the original grid for one
// (task, state kind, layer) cell; layers 1..3 only.
struct GridCell {
  std::size_t batch_size;
  double learning_rate;
};
GridCell paper_grid(ProbeTask task, states::StateKind kind, std::uint32_t layer);

// Column-aligned training material for one probe.
struct ProbeData {
  // input_dim x N state vectors.
  Matrix inputs;
  // output_dim x N positive targets.
  Matrix targets;
  // Word whose quartile supplies the negatives, per item.
  std::vector<lm::TokenId> anchor;
  // Words never drawn as negatives for the item, besides the anchor.
  std::vector<std::vector<lm::TokenId>> excluded;

  std::size_t size() const noexcept { return anchor.size(); }
  // Throws DimensionError when the pieces disagree on the item count.
  void check() const;
};

struct CurvePoint {
  std::size_t epoch;
  double train_loss;
  double valid_loss;
};

struct ProbeTrainResult {
  ProbeModel model;
  std::vector<CurvePoint> curve;
  // 1-based epoch of the returned parameters; 0 when no epoch ran.
  std::size_t best_epoch = 0;
};

// Adam on the max-margin loss with per-epoch reshuffling and fresh
// negatives. Validation negatives are drawn once, so the validation curve
// compares like with like. Returns the parameters of the epoch with the
// lowest validation loss. Negative targets are columns of `embeddings`.
// Throws ConfigError when epochs are requested without validation data.
ProbeTrainResult train_probe(const ProbeBinding& binding, const ProbeData& train,
                             const ProbeData& valid, const Matrix& embeddings,
                             const NegativeSampler& sampler, const ProbeTrainConfig& config);

// Mean loss over a data set with fixed negatives, negatives[j] holding the k
// words for item j.
double evaluate_loss(const ProbeModel& model, const ProbeData& data, const Matrix& embeddings,
                     const std::vector<std::vector<lm::TokenId>>& negatives, double margin);

// "epoch,train_loss,valid_loss" with one line per point.
std::string curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace ambiprobe::probe
