#include "ambiprobe/probe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ambiprobe/error.hpp"

namespace ambiprobe::probe {

void ProbeTrainConfig::validate() const {
  if (negatives == 0) throw ConfigError("probe: negatives per positive must be at least 1");
  if (!(margin >= 0.0 && margin < 1.0)) throw ConfigError("probe: margin must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("probe: batch size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("probe: learning rate must be positive");
}

std::string ProbeTrainConfig::to_text() const {
  nlohmann::ordered_json j;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["negatives"] = negatives;
  j["margin"] = margin;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  return j.dump();
}

ProbeTrainConfig ProbeTrainConfig::from_text(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    ProbeTrainConfig c;
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.negatives = j.at("negatives").get<std::size_t>();
    c.margin = j.at("margin").get<double>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("probe config: ") + e.what());
  }
}

GridCell paper_grid(ProbeTask task, states::StateKind kind, std::uint32_t layer) {
  if (layer < 1 || layer > 3) {
    throw ConfigError("probe grid defined for layers 1-3, got " + std::to_string(layer));
  }
  // [kind][layer - 1][task]
  static constexpr GridCell kGrid[2][3][3] = {
      {{{16, 5e-5}, {32, 1e-4}, {32, 5e-5}},
       {{16, 5e-5}, {64, 5e-4}, {64, 5e-4}},
       {{16, 5e-5}, {128, 5e-4}, {16, 5e-5}}},
      {{{128, 1e-3}, {128, 1e-3}, {128, 5e-4}},
       {{16, 1e-4}, {64, 5e-4}, {16, 5e-4}},
       {{128, 1e-3}, {16, 1e-4}, {128, 5e-4}}},
  };
  return kGrid[static_cast<int>(kind)][layer - 1][static_cast<int>(task)];
}

void ProbeData::check() const {
  const auto n = static_cast<Index>(anchor.size());
  if (inputs.cols() != n || targets.cols() != n || excluded.size() != anchor.size()) {
    throw DimensionError("probe data: inputs " + shape_string(inputs) + ", targets " +
                         shape_string(targets) + ", " + std::to_string(anchor.size()) +
                         " anchors, " + std::to_string(excluded.size()) + " exclusion lists");
  }
}

namespace {

Matrix gather(const Matrix& m, std::span<const std::size_t> cols) {
  Matrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = m.col(static_cast<Index>(cols[j]));
  return out;
}

std::vector<std::vector<lm::TokenId>> draw_negatives(const ProbeData& data,
                                                     std::span<const std::size_t> items,
                                                     const NegativeSampler& sampler, std::size_t k,
                                                     Rng& rng) {
  std::vector<std::vector<lm::TokenId>> out;
  out.reserve(items.size());
  for (auto i : items) out.push_back(sampler.sample(data.anchor[i], data.excluded[i], k, rng));
  return out;
}

// negatives[j][r] -> r-th matrix, column j.
std::vector<Matrix> negative_matrices(const std::vector<std::vector<lm::TokenId>>& negatives,
                                      const Matrix& embeddings, std::size_t k) {
  std::vector<Matrix> out(k, Matrix(embeddings.rows(), static_cast<Index>(negatives.size())));
  for (std::size_t j = 0; j < negatives.size(); ++j) {
    for (std::size_t r = 0; r < k; ++r) {
      out[r].col(static_cast<Index>(j)) = embeddings.col(negatives[j][r]);
    }
  }
  return out;
}

double loss_value(const ProbeModel& model, const Matrix& inputs, const Matrix& targets,
                  const std::vector<Matrix>& negatives, double margin) {
  ad::Tape tape;
  auto w = tape.view(model.weight().value, false);
  auto b = tape.view(model.bias().value, false);
  auto out = probe_forward(w, b, tape.constant(inputs));
  std::vector<ad::Var> negs;
  for (const auto& n : negatives) negs.push_back(tape.view(n, false));
  return batch_loss(out, tape.view(targets, false), negs, margin).value()(0, 0);
}

}  // namespace

double evaluate_loss(const ProbeModel& model, const ProbeData& data, const Matrix& embeddings,
                     const std::vector<std::vector<lm::TokenId>>& negatives, double margin) {
  if (data.size() == 0) throw ContractError("evaluate_loss: empty data");
  const std::size_t k = negatives.empty() ? 0 : negatives.front().size();
  return loss_value(model, data.inputs, data.targets, negative_matrices(negatives, embeddings, k),
                    margin);
}

ProbeTrainResult train_probe(const ProbeBinding& binding, const ProbeData& train,
                             const ProbeData& valid, const Matrix& embeddings,
                             const NegativeSampler& sampler, const ProbeTrainConfig& config) {
  config.validate();
  train.check();
  valid.check();
  if (train.targets.rows() != embeddings.rows()) {
    throw DimensionError("train_probe: targets " + shape_string(train.targets) +
                         " vs embeddings " + shape_string(embeddings));
  }
  Rng init_rng(derive_seed(config.seed, 1));
  Rng rng(derive_seed(config.seed, 2));
  ProbeModel model(binding, static_cast<std::size_t>(train.inputs.rows()),
                   static_cast<std::size_t>(embeddings.rows()), init_rng);
  ProbeTrainResult result{model, {}, 0};
  if (config.max_epochs == 0) return result;
  if (valid.size() == 0) {
    throw ConfigError("train_probe: early stopping needs validation data for " + binding.name());
  }
  if (config.patience == 0) throw ConfigError("train_probe: early-stopping patience is zero");
  if (train.size() == 0) throw InputError("train_probe: no training items for " + binding.name());
  if (valid.inputs.rows() != train.inputs.rows()) {
    throw DimensionError("train_probe: valid inputs " + shape_string(valid.inputs) +
                         " vs train inputs " + shape_string(train.inputs));
  }

  std::vector<std::size_t> valid_ids(valid.size());
  std::iota(valid_ids.begin(), valid_ids.end(), std::size_t{0});
  Rng valid_rng(derive_seed(config.seed, 3));
  const auto valid_negs = negative_matrices(
      draw_negatives(valid, valid_ids, sampler, config.negatives, valid_rng), embeddings,
      config.negatives);

  std::vector<Parameter*> params{&model.weight(), &model.bias()};
  Adam adam(params, AdamConfig{.learning_rate = config.learning_rate});
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t s = 0; s < order.size(); s += config.batch_size) {
      std::span<const std::size_t> ids(order.data() + s,
                                       std::min(config.batch_size, order.size() - s));
      const auto negs = negative_matrices(
          draw_negatives(train, ids, sampler, config.negatives, rng), embeddings, config.negatives);
      const Matrix x = gather(train.inputs, ids);
      const Matrix y = gather(train.targets, ids);
      ad::Tape tape;
      auto w = tape.view(model.weight().value, true);
      auto b = tape.view(model.bias().value, true);
      auto out = probe_forward(w, b, tape.view(x, false));
      std::vector<ad::Var> nv;
      for (const auto& n : negs) nv.push_back(tape.view(n, false));
      auto loss = batch_loss(out, tape.view(y, false), nv, config.margin);
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) {
        throw DivergenceError("train_probe: non-finite loss for " + binding.name());
      }
      tape.backward(loss);
      model.weight().grad = tape.grad(w);
      model.bias().grad = tape.grad(b);
      adam.step();
      total += value * static_cast<double>(ids.size());
    }
    const double train_loss = total / static_cast<double>(order.size());
    const double valid_loss =
        loss_value(model, valid.inputs, valid.targets, valid_negs, config.margin);
    result.curve.push_back({epoch, train_loss, valid_loss});
    if (valid_loss < best) {
      best = valid_loss;
      since_best = 0;
      result.best_epoch = epoch;
      result.model = model;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "epoch,train_loss,valid_loss\n" << std::setprecision(17);
  for (const auto& p : curve) out << p.epoch << ',' << p.train_loss << ',' << p.valid_loss << '\n';
  return out.str();
}

}  // namespace ambiprobe::probe
