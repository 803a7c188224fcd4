#include "ambiprobe/lm/model.hpp"

#include "ambiprobe/error.hpp"

namespace ambiprobe::lm {

TokenBatch TokenBatch::single(std::span<const TokenId> sequence) {
  return TokenBatch{sequence.size(), 1, std::vector<TokenId>(sequence.begin(), sequence.end())};
}

TokenBatch TokenBatch::stack(std::span<const std::vector<TokenId>> sequences) {
  if (sequences.empty()) throw ContractError("TokenBatch: no sequences");
  TokenBatch b;
  b.length = sequences.front().size();
  b.batch = sequences.size();
  b.tokens.resize(b.length * b.batch);
  for (std::size_t j = 0; j < b.batch; ++j) {
    if (sequences[j].size() != b.length) throw ContractError("TokenBatch: ragged sequences");
    for (std::size_t t = 0; t < b.length; ++t) b.tokens[t * b.batch + j] = sequences[j][t];
  }
  return b;
}

namespace {

constexpr std::size_t kParamsPerLayer = 3;

std::string layer_name(const char* dir, std::size_t layer, const char* what) {
  return std::string(dir) + "." + std::to_string(layer) + "." + what;
}

}  // namespace

std::vector<std::pair<std::string, std::pair<Index, Index>>> parameter_layout(
    const LMConfig& config, std::size_t vocab_size) {
  std::vector<std::pair<std::string, std::pair<Index, Index>>> out;
  const auto v = static_cast<Index>(vocab_size);
  out.push_back({"embedding", {static_cast<Index>(config.embedding_dim), v}});
  for (const char* dir : {"forward", "backward"}) {
    std::size_t in = config.embedding_dim;
    for (std::size_t l = 0; l < config.num_layers(); ++l) {
      const auto h = static_cast<Index>(config.hidden_sizes[l]);
      out.push_back({layer_name(dir, l, "wx"), {4 * h, static_cast<Index>(in)}});
      out.push_back({layer_name(dir, l, "wh"), {4 * h, h}});
      out.push_back({layer_name(dir, l, "b"), {4 * h, 1}});
      in = config.hidden_sizes[l];
    }
  }
  out.push_back({"output.w", {v, static_cast<Index>(config.last_hidden())}});
  out.push_back({"output.b", {v, 1}});
  return out;
}

LanguageModel::LanguageModel(LMConfig config, std::size_t vocab_size, Rng& rng)
    : config_(std::move(config)), vocab_size_(vocab_size) {
  config_.validate();
  for (const auto& [name, shape] : parameter_layout(config_, vocab_size_)) {
    const auto [rows, cols] = shape;
    Matrix value;
    if (cols == 1) {
      value = Matrix::Zero(rows, 1);
      // Gate order is input, forget, candidate, output.
      if (name != "output.b") value.middleRows(rows / 4, rows / 4).setOnes();
    } else if (name == "embedding") {
      value = init_uniform_fan_in(cols, rows, rng).transpose();
    } else {
      value = init_uniform_fan_in(rows, cols, rng);
    }
    params_.emplace_back(name, std::move(value));
  }
}

LanguageModel::LanguageModel(LMConfig config, std::size_t vocab_size, std::vector<Parameter> params)
    : config_(std::move(config)), vocab_size_(vocab_size), params_(std::move(params)) {
  config_.validate();
  check_parameters();
}

void LanguageModel::check_parameters() const {
  auto layout = parameter_layout(config_, vocab_size_);
  if (layout.size() != params_.size()) {
    throw IntegrityError("language model: expected " + std::to_string(layout.size()) +
                         " parameters, got " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& [name, shape] = layout[i];
    const auto& p = params_[i];
    if (p.name != name || p.value.rows() != shape.first || p.value.cols() != shape.second) {
      throw IntegrityError("language model: parameter " + std::to_string(i) + " is '" + p.name +
                           "' " + shape_string(p.value) + ", expected '" + name + "' " +
                           shape_string(shape.first, shape.second));
    }
  }
}

std::vector<Parameter*> LanguageModel::parameter_ptrs() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

LanguageModel::Graph LanguageModel::build_graph(ad::Tape& tape, const TokenBatch& batch,
                                                bool training, Rng* rng, bool track_grads,
                                                bool with_output) const {
  if (batch.length == 0 || batch.batch == 0) throw InputError("lm_forward: empty sequence");
  for (auto tok : batch.tokens) {
    if (tok < 0 || static_cast<std::size_t>(tok) >= vocab_size_) {
      throw InputError("lm_forward: token index " + std::to_string(tok) + " outside vocabulary of " +
                       std::to_string(vocab_size_));
    }
  }
  if (training && rng == nullptr) throw ContractError("lm_forward: training mode needs an RNG");
  const double rate = training ? config_.dropout : 0.0;
  Rng dummy;
  Rng& r = rng != nullptr ? *rng : dummy;

  Graph g;
  g.params.reserve(params_.size());
  for (const auto& p : params_) g.params.push_back(tape.view(p.value, track_grads));

  const std::size_t T = batch.length;
  const auto B = static_cast<Index>(batch.batch);
  const std::size_t L = num_layers();

  std::vector<ad::Var> inputs(T);
  std::vector<int> column(batch.batch);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < batch.batch; ++b) column[b] = batch.at(t, b);
    inputs[t] = ad::dropout(ad::gather_columns(g.params[0], column), rate, r, training);
  }

  g.forward.assign(L, std::vector<ad::Var>(T));
  g.backward.assign(L, std::vector<ad::Var>(T));
  // Dropped-out layer outputs per direction, feeding the next layer and the
  // prediction.
  std::vector<ad::Var> fwd_in = inputs;
  std::vector<ad::Var> bwd_in = inputs;
  for (std::size_t l = 0; l < L; ++l) {
    const auto H = static_cast<Index>(config_.hidden_sizes[l]);
    for (int dir = 0; dir < 2; ++dir) {
      const std::size_t base = 1 + (dir * L + l) * kParamsPerLayer;
      ad::Var wx = g.params[base], wh = g.params[base + 1], bias = g.params[base + 2];
      ad::Var zero = tape.constant(Matrix::Zero(H, B));
      ad::Var h = zero, c = zero;
      auto& in = dir == 0 ? fwd_in : bwd_in;
      auto& states = dir == 0 ? g.forward[l] : g.backward[l];
      std::vector<ad::Var> out(T);
      for (std::size_t step = 0; step < T; ++step) {
        const std::size_t t = dir == 0 ? step : T - 1 - step;
        auto s = ad::lstm_cell(in[t], h, c, wx, wh, bias);
        h = s.h;
        c = s.c;
        states[t] = h;
        out[t] = ad::dropout(h, rate, r, training);
      }
      in = std::move(out);
    }
  }

  if (!with_output) return g;

  const auto H = static_cast<Index>(config_.last_hidden());
  std::vector<ad::Var> summed(T);
  for (std::size_t t = 0; t < T; ++t) {
    const bool left = t > 0, right = t + 1 < T;
    if (left && right) {
      summed[t] = ad::add(fwd_in[t - 1], bwd_in[t + 1]);
    } else if (left) {
      summed[t] = fwd_in[t - 1];
    } else if (right) {
      summed[t] = bwd_in[t + 1];
    } else {
      summed[t] = tape.constant(Matrix::Zero(H, B));
    }
  }
  auto stacked = T == 1 ? summed[0] : ad::concat_cols(summed);
  g.logits = ad::affine(g.params[params_.size() - 2], stacked, g.params[params_.size() - 1]);
  return g;
}

ad::Var LanguageModel::nll(const Graph& graph, const TokenBatch& batch, std::size_t* count) {
  std::vector<int> targets(batch.tokens.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const bool skip = batch.tokens[i] == Vocabulary::kBoundaryId;
    targets[i] = skip ? -1 : batch.tokens[i];
    n += skip ? 0 : 1;
  }
  if (count != nullptr) *count = n;
  return ad::softmax_nll(graph.logits, targets);
}

SequenceStates LanguageModel::forward(std::span<const TokenId> sequence,
                                      bool with_distributions) const {
  ad::Tape tape;
  auto batch = TokenBatch::single(sequence);
  auto g = build_graph(tape, batch, false, nullptr, false, with_distributions);
  SequenceStates out;
  const std::size_t T = sequence.size();
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const auto H = static_cast<Index>(config_.hidden_sizes[l]);
    Matrix f(H, static_cast<Index>(T)), b(H, static_cast<Index>(T));
    for (std::size_t t = 0; t < T; ++t) {
      f.col(static_cast<Index>(t)) = g.forward[l][t].value().col(0);
      b.col(static_cast<Index>(t)) = g.backward[l][t].value().col(0);
    }
    out.forward.push_back(std::move(f));
    out.backward.push_back(std::move(b));
  }
  if (with_distributions) out.distributions = ad::softmax(g.logits).value();
  return out;
}

}  // namespace ambiprobe::lm
