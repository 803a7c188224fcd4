#include "ambiprobe/lm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ambiprobe/error.hpp"

namespace ambiprobe::lm {

namespace {

bool has_target(const std::vector<TokenId>& chunk) {
  return std::any_of(chunk.begin(), chunk.end(),
                     [](TokenId t) { return t != Vocabulary::kBoundaryId; });
}

// Summed NLL and target count over a set of chunks in eval mode.
std::pair<double, std::size_t> evaluate(const LanguageModel& model,
                                        const std::vector<std::vector<TokenId>>& chunks,
                                        std::size_t batch_size) {
  // Group equal-length chunks so they can share a batch.
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < chunks.size(); ++i) by_length[chunks[i].size()].push_back(i);
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& [len, ids] : by_length) {
    for (std::size_t s = 0; s < ids.size(); s += batch_size) {
      std::vector<std::vector<TokenId>> group;
      for (std::size_t k = s; k < std::min(ids.size(), s + batch_size); ++k) {
        group.push_back(chunks[ids[k]]);
      }
      auto batch = TokenBatch::stack(group);
      ad::Tape tape;
      auto g = model.build_graph(tape, batch, false, nullptr, false);
      std::size_t n = 0;
      total += LanguageModel::nll(g, batch, &n).value()(0, 0);
      count += n;
    }
  }
  return {total, count};
}

}  // namespace

std::vector<std::vector<TokenId>> make_chunks(std::span<const TokenId> stream, std::size_t length) {
  if (length == 0) throw ContractError("make_chunks: zero length");
  std::vector<std::vector<TokenId>> out;
  for (std::size_t s = 0; s < stream.size(); s += length) {
    auto end = std::min(stream.size(), s + length);
    std::vector<TokenId> chunk(stream.begin() + static_cast<std::ptrdiff_t>(s),
                               stream.begin() + static_cast<std::ptrdiff_t>(end));
    if (has_target(chunk)) out.push_back(std::move(chunk));
  }
  return out;
}

double perplexity(const LanguageModel& model, std::span<const TokenId> stream) {
  auto chunks = make_chunks(stream, model.config().sequence_length);
  auto [total, count] = evaluate(model, chunks, model.config().batch_size);
  if (count == 0) throw InputError("perplexity: corpus has no scorable tokens");
  return std::exp(total / static_cast<double>(count));
}

TrainResult train_lm(std::span<const TokenId> train, std::span<const TokenId> valid,
                     std::size_t vocab_size, const LMConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  auto train_chunks = make_chunks(train, config.sequence_length);
  auto valid_chunks = make_chunks(valid, config.sequence_length);
  if (train_chunks.empty()) throw InputError("train_lm: empty training split");
  if (valid_chunks.empty()) throw InputError("train_lm: empty validation split");

  Rng init_rng(derive_seed(config.seed, 1));
  Rng rng(derive_seed(config.seed, 2));
  LanguageModel model(config, vocab_size, init_rng);
  auto params = model.parameter_ptrs();
  Adam adam(params, AdamConfig{.learning_rate = config.initial_lr});
  PlateauDecay decay(0.5, 1);

  TrainingMetadata meta;
  std::vector<Parameter> best = model.parameters();
  double best_ppl = std::numeric_limits<double>::infinity();

  // Full-length chunks are batched together; a trailing short chunk trains
  // on its own.
  std::vector<std::size_t> full, ragged;
  for (std::size_t i = 0; i < train_chunks.size(); ++i) {
    (train_chunks[i].size() == config.sequence_length ? full : ragged).push_back(i);
  }

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(full.begin(), full.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t s = 0; s < full.size(); s += config.batch_size) {
      batches.emplace_back(full.begin() + static_cast<std::ptrdiff_t>(s),
                           full.begin() + static_cast<std::ptrdiff_t>(
                                              std::min(full.size(), s + config.batch_size)));
    }
    for (auto i : ragged) batches.push_back({i});
    std::shuffle(batches.begin(), batches.end(), rng);

    double epoch_loss = 0.0;
    std::size_t epoch_count = 0;
    for (const auto& ids : batches) {
      std::vector<std::vector<TokenId>> group;
      for (auto i : ids) group.push_back(train_chunks[i]);
      auto batch = TokenBatch::stack(group);
      ad::Tape tape;
      auto g = model.build_graph(tape, batch, true, &rng, true);
      std::size_t n = 0;
      auto total = LanguageModel::nll(g, batch, &n);
      if (n == 0) continue;
      const double value = total.value()(0, 0);
      if (!std::isfinite(value)) {
        throw DivergenceError("train_lm: non-finite loss in epoch " + std::to_string(epoch));
      }
      auto loss = ad::scale_shift(total, 1.0 / static_cast<double>(n), 0.0);
      tape.backward(loss);
      for (std::size_t k = 0; k < params.size(); ++k) params[k]->grad = tape.grad(g.params[k]);
      clip_grad_norm(params, config.clip_norm);
      adam.step();
      epoch_loss += value;
      epoch_count += n;
    }

    auto [vtotal, vcount] = evaluate(model, valid_chunks, config.batch_size);
    const double vloss = vtotal / static_cast<double>(vcount);
    if (!std::isfinite(vloss)) {
      throw DivergenceError("train_lm: non-finite validation loss in epoch " +
                            std::to_string(epoch));
    }
    const double vppl = std::exp(vloss);
    const double train_loss = epoch_count ? epoch_loss / static_cast<double>(epoch_count) : 0.0;
    const bool improved = vppl < best_ppl;
    if (improved) {
      best_ppl = vppl;
      best = model.parameters();
      meta.best_epoch = epoch;
    }
    meta.epochs_run = epoch;
    meta.train_loss.push_back(train_loss);
    meta.valid_perplexity.push_back(vppl);
    meta.learning_rate.push_back(adam.learning_rate());
    if (on_epoch) on_epoch({epoch, train_loss, vppl, adam.learning_rate(), improved});
    adam.set_learning_rate(adam.learning_rate() * decay.observe(vloss));
  }

  std::ostringstream rs;
  rs << rng;
  meta.rng_state = rs.str();
  model.parameters() = std::move(best);
  for (auto& p : model.parameters()) p.zero_grad();
  return {std::move(model), std::move(meta)};
}

}  // namespace ambiprobe::lm
