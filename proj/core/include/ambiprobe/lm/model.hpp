#pragma once

#include <span>
#include <string>
#include <vector>

#include "ambiprobe/lm/config.hpp"
#include "ambiprobe/lm/vocabulary.hpp"
#include "ambiprobe/numcore/adam.hpp"
#include "ambiprobe/numcore/tape.hpp"

namespace ambiprobe::lm {

// Equal-length sequences laid out time-major: tokens[t * batch + b].
struct TokenBatch {
  std::size_t length = 0;
  std::size_t batch = 0;
  std::vector<TokenId> tokens;

  TokenId at(std::size_t t, std::size_t b) const { return tokens[t * batch + b]; }
  static TokenBatch single(std::span<const TokenId> sequence);
  static TokenBatch stack(std::span<const std::vector<TokenId>> sequences);
};

// Hidden states of one sequence in eval mode. Column t of forward[i] is the
// left-to-right state of layer i+1 after reading token t; column t of
// backward[i] the right-to-left state after reading token t.
struct SequenceStates {
  std::vector<Matrix> forward;
  std::vector<Matrix> backward;
  // Column t is o_t, the predicted distribution over the vocabulary for
  // position t. Empty unless requested.
  Matrix distributions;
};

// Bidirectional stacked LSTM language model. Each direction has its own
// stack; the word at t is predicted from the sum of the top forward state at
// t-1 and the top backward state at t+1 through one affine map and a
// softmax, so o_t never sees token t. Missing neighbours at the sequence
// ends contribute zero states.
class LanguageModel {
 public:
  // Random initialization: weights uniform in +-1/sqrt(fan_in), biases zero,
  // forget-gate biases one.
  LanguageModel(LMConfig config, std::size_t vocab_size, Rng& rng);
  // Adopts existing parameters; throws IntegrityError on a name or shape
  // mismatch with the configuration.
  LanguageModel(LMConfig config, std::size_t vocab_size, std::vector<Parameter> params);

  const LMConfig& config() const noexcept { return config_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t num_layers() const noexcept { return config_.num_layers(); }

  std::vector<Parameter>& parameters() noexcept { return params_; }
  const std::vector<Parameter>& parameters() const noexcept { return params_; }
  std::vector<Parameter*> parameter_ptrs();

  // Embedding table, one column per vocabulary entry.
  const Matrix& embeddings() const { return params_[0].value; }

  struct Graph {
    // [layer][t], each hidden x batch; states before dropout.
    std::vector<std::vector<ad::Var>> forward;
    std::vector<std::vector<ad::Var>> backward;
    // vocab x (length * batch), column t * batch + b. Invalid when the graph
    // was built without the output layer.
    ad::Var logits;
    // One leaf per parameter, in parameters() order.
    std::vector<ad::Var> params;
  };

  // Records the full computation on `tape`. Dropout is active only when
  // `training` is set, and then draws from `rng`. With `track_grads` the
  // parameter leaves require gradients.
  Graph build_graph(ad::Tape& tape, const TokenBatch& batch, bool training, Rng* rng,
                    bool track_grads, bool with_output = true) const;

  // Summed negative log-likelihood over positions whose target is not the
  // boundary marker; `count` receives the number of such positions.
  static ad::Var nll(const Graph& graph, const TokenBatch& batch, std::size_t* count);

  // Eval-mode pass over one sequence. Throws InputError on an empty sequence
  // or an out-of-range index.
  SequenceStates forward(std::span<const TokenId> sequence, bool with_distributions = true) const;

 private:
  void check_parameters() const;

  LMConfig config_;
  std::size_t vocab_size_;
  std::vector<Parameter> params_;
};

// Parameter names and shapes implied by a configuration, in storage order.
std::vector<std::pair<std::string, std::pair<Index, Index>>> parameter_layout(
    const LMConfig& config, std::size_t vocab_size);

}  // namespace ambiprobe::lm
