#include "ambiprobe/states/extract.hpp"

#include <string>

#include "ambiprobe/error.hpp"

namespace ambiprobe::states {

const char* to_string(StateKind kind) noexcept {
  return kind == StateKind::Current ? "current" : "predictive";
}

StateKind parse_state_kind(std::string_view text) {
  if (text == "current") return StateKind::Current;
  if (text == "predictive") return StateKind::Predictive;
  throw ConfigError("unknown state kind '" + std::string(text) + "'");
}

namespace {

void check_position(std::size_t t, std::size_t length) {
  if (t >= length) {
    throw InputError("state extraction: position " + std::to_string(t) +
                     " outside sequence of length " + std::to_string(length));
  }
}

Vector column_or_zero(const Matrix& m, std::size_t t, bool present) {
  if (!present) return Vector::Zero(m.rows());
  return m.col(static_cast<Index>(t));
}

}  // namespace

LayerVectors current_states(const lm::SequenceStates& states, std::size_t t) {
  LayerVectors out;
  for (std::size_t l = 0; l < states.forward.size(); ++l) {
    const auto& f = states.forward[l];
    const auto& b = states.backward[l];
    check_position(t, static_cast<std::size_t>(f.cols()));
    Vector v(f.rows() + b.rows());
    v << f.col(static_cast<Index>(t)), b.col(static_cast<Index>(t));
    out.push_back(std::move(v));
  }
  return out;
}

LayerVectors predictive_states(const lm::SequenceStates& states, std::size_t t) {
  LayerVectors out;
  for (std::size_t l = 0; l < states.forward.size(); ++l) {
    const auto& f = states.forward[l];
    const auto& b = states.backward[l];
    const auto T = static_cast<std::size_t>(f.cols());
    check_position(t, T);
    Vector v(f.rows() + b.rows());
    v << column_or_zero(f, t - 1, t > 0), column_or_zero(b, t + 1, t + 1 < T);
    out.push_back(std::move(v));
  }
  return out;
}

LayerVectors extract_current(const lm::LanguageModel& model, std::span<const lm::TokenId> sequence,
                             std::size_t t) {
  check_position(t, sequence.size());
  return current_states(model.forward(sequence, false), t);
}

LayerVectors extract_predictive(const lm::LanguageModel& model,
                                std::span<const lm::TokenId> sequence, std::size_t t) {
  check_position(t, sequence.size());
  return predictive_states(model.forward(sequence, false), t);
}

}  // namespace ambiprobe::states
