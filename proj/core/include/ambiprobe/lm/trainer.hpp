#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ambiprobe/lm/model.hpp"

namespace ambiprobe::lm {

struct TrainingMetadata {
  std::size_t epochs_run = 0;
  // 1-based epoch whose parameters were kept; 0 when no epoch ran.
  std::size_t best_epoch = 0;
  std::vector<double> train_loss;
  std::vector<double> valid_perplexity;
  std::vector<double> learning_rate;
  // Serialized state of the training RNG after the last epoch.
  std::string rng_state;

  bool operator==(const TrainingMetadata&) const = default;
};

struct EpochReport {
  std::size_t epoch;
  double train_loss;
  double valid_perplexity;
  double learning_rate;
  bool improved;
};

using EpochCallback = std::function<void(const EpochReport&)>;

// Splits a token stream into consecutive non-overlapping chunks of at most
// `length` tokens. Hidden state is never carried across chunks.
std::vector<std::vector<TokenId>> make_chunks(std::span<const TokenId> stream, std::size_t length);

// exp(mean NLL) over all non-boundary positions, evaluated chunk by chunk
// in eval mode with zero states at both ends of every chunk.
double perplexity(const LanguageModel& model, std::span<const TokenId> stream);

struct TrainResult {
  LanguageModel model;
  TrainingMetadata metadata;
};

// Minimizes the mean NLL with Adam over shuffled mini-batches of chunks.
// The learning rate halves after every epoch whose validation perplexity
// does not improve on the best so far, and the parameters of the best
// validation epoch are returned. Throws DivergenceError on a non-finite loss.
TrainResult train_lm(std::span<const TokenId> train, std::span<const TokenId> valid,
                     std::size_t vocab_size, const LMConfig& config,
                     const EpochCallback& on_epoch = {});

}  // namespace ambiprobe::lm
