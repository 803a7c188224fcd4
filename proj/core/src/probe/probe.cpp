#include "ambiprobe/probe/probe.hpp"

#include <algorithm>
#include <cctype>

#include "ambiprobe/error.hpp"
#include "ambiprobe/numcore/functional.hpp"

namespace ambiprobe::probe {

const char* to_string(ProbeTask task) noexcept {
  switch (task) {
    case ProbeTask::Word: return "WORD";
    case ProbeTask::Sub: return "SUB";
    case ProbeTask::WordSub: return "WORD_SUB";
  }
  return "?";
}

ProbeTask parse_task(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (up == "WORD") return ProbeTask::Word;
  if (up == "SUB") return ProbeTask::Sub;
  if (up == "WORD_SUB" || up == "WORD&SUB" || up == "WS") return ProbeTask::WordSub;
  throw ConfigError("unknown probe task '" + std::string(text) + "'");
}

std::string ProbeBinding::name() const {
  return std::string(states::to_string(kind)) + "-" + std::to_string(layer) + "-" + to_string(task);
}

ProbeModel::ProbeModel(ProbeBinding binding, std::size_t input_dim, std::size_t output_dim, Rng& rng)
    : binding_(binding),
      weight_("probe.w", init_uniform_fan_in(static_cast<Index>(output_dim),
                                             static_cast<Index>(input_dim), rng)),
      bias_("probe.b", Matrix::Zero(static_cast<Index>(output_dim), 1)) {
  if (input_dim == 0 || output_dim == 0) throw ConfigError("probe: zero dimension");
}

ProbeModel::ProbeModel(ProbeBinding binding, Parameter weight, Parameter bias)
    : binding_(binding), weight_(std::move(weight)), bias_(std::move(bias)) {
  if (bias_.value.cols() != 1 || bias_.value.rows() != weight_.value.rows()) {
    throw DimensionError("probe: bias " + shape_string(bias_.value) + " does not fit weight " +
                         shape_string(weight_.value));
  }
}

Matrix ProbeModel::forward(const Matrix& inputs) const {
  if (inputs.rows() != weight_.value.cols()) {
    throw DimensionError("probe_forward: weight " + shape_string(weight_.value) + " vs input " +
                         shape_string(inputs));
  }
  Matrix pre = weight_.value * inputs;
  pre.colwise() += bias_.value.col(0);
  return pre.array().tanh().matrix();
}

Vector ProbeModel::forward(const Vector& input) const {
  return forward(Matrix(input)).col(0);
}

ad::Var probe_forward(ad::Var weight, ad::Var bias, ad::Var inputs) {
  return ad::tanh(ad::affine(weight, inputs, bias));
}

double max_margin_loss(const Vector& r_hat, const Vector& r, bool positive, double margin) {
  const double c = fn::cosine(r_hat, r);
  return positive ? 1.0 - c : std::max(0.0, c - margin);
}

ad::Var batch_loss(ad::Var outputs, ad::Var positives, std::span<const ad::Var> negatives,
                   double margin) {
  auto loss = ad::mean(ad::scale_shift(ad::cosine_columns(outputs, positives), -1.0, 1.0));
  if (negatives.empty()) return loss;
  const double w = 1.0 / static_cast<double>(negatives.size());
  for (const auto& n : negatives) {
    auto term = ad::mean(ad::hinge(ad::cosine_columns(outputs, n), margin));
    loss = ad::add(loss, ad::scale_shift(term, w, 0.0));
  }
  return loss;
}

}  // namespace ambiprobe::probe
