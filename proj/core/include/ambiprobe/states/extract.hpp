#pragma once

#include <span>
#include <vector>

#include "ambiprobe/lm/model.hpp"

namespace ambiprobe::states {

enum class StateKind { Current, Predictive };

const char* to_string(StateKind kind) noexcept;
// Accepts "current" and "predictive"; throws ConfigError otherwise.
StateKind parse_state_kind(std::string_view text);

// Per-layer vectors, index 0 = layer 1. Each has 2 * hidden_sizes[i] entries.
using LayerVectors = std::vector<Vector>;

// [forward state at t ; backward state at t] for every layer.
LayerVectors current_states(const lm::SequenceStates& states, std::size_t t);
// [forward state at t-1 ; backward state at t+1]; a neighbour outside the
// sequence contributes the zero initial state.
LayerVectors predictive_states(const lm::SequenceStates& states, std::size_t t);

// Eval-mode extraction from a frozen model. Throws InputError when t is not
// a position of the sequence.
LayerVectors extract_current(const lm::LanguageModel& model, std::span<const lm::TokenId> sequence,
                             std::size_t t);
LayerVectors extract_predictive(const lm::LanguageModel& model,
                                std::span<const lm::TokenId> sequence, std::size_t t);

}  // namespace ambiprobe::states
