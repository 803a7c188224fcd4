#include <benchmark/benchmark.h>

#include <random>

#include "ambiprobe/eval/neighbors.hpp"
#include "ambiprobe/lm/model.hpp"
#include "ambiprobe/probe/probe.hpp"

using namespace ambiprobe;

namespace {

std::vector<lm::TokenId> random_tokens(std::size_t n, std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<lm::TokenId> out(n);
  for (auto& t : out) t = static_cast<lm::TokenId>(rng() % vocab);
  return out;
}

// Eval-mode pass over one 35-token sequence at desk size.
void BM_LmForward(benchmark::State& state) {
  const auto vocab = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  lm::LanguageModel model(lm::LMConfig::desk(), vocab, rng);
  const auto seq = random_tokens(35, vocab, 2);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(seq, true));
  state.SetItemsProcessed(state.iterations() * 35);
}
BENCHMARK(BM_LmForward)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

// Forward and backward through the tape for one training batch.
void BM_LmTrainStep(benchmark::State& state) {
  const std::size_t vocab = 5000, batch = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const auto cfg = lm::LMConfig::desk();
  lm::LanguageModel model(cfg, vocab, rng);
  std::vector<std::vector<lm::TokenId>> seqs;
  for (std::size_t b = 0; b < batch; ++b) seqs.push_back(random_tokens(35, vocab, 10 + b));
  const auto tokens = lm::TokenBatch::stack(seqs);
  for (auto _ : state) {
    ad::Tape tape;
    auto g = model.build_graph(tape, tokens, true, &rng, true);
    std::size_t n = 0;
    auto loss = lm::LanguageModel::nll(g, tokens, &n);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(g.params[0]));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(35 * batch));
}
BENCHMARK(BM_LmTrainStep)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

// Full scan of the embedding table for the five nearest words.
void BM_NearestNeighbors(benchmark::State& state) {
  const auto vocab = state.range(0), dim = state.range(1);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Matrix emb(dim, vocab);
  for (Index i = 0; i < emb.size(); ++i) emb.data()[i] = n(rng);
  Vector query = emb.col(7);
  for (auto _ : state) benchmark::DoNotOptimize(eval::nearest_neighbors(query, emb, 5, {}));
}
BENCHMARK(BM_NearestNeighbors)->Args({5000, 64})->Args({50000, 300})->Unit(benchmark::kMicrosecond);

// One probe gradient: forward, max-margin loss with five negatives, backward.
void BM_ProbeStep(benchmark::State& state) {
  const Index in = state.range(0), out = state.range(1), batch = 32;
  Rng rng(5);
  probe::ProbeModel model({probe::ProbeTask::Word, states::StateKind::Current, 1}, static_cast<std::size_t>(in),
                          static_cast<std::size_t>(out), rng);
  const Matrix x = Matrix::Random(in, batch), y = Matrix::Random(out, batch);
  std::vector<Matrix> negs;
  for (int k = 0; k < 5; ++k) negs.push_back(Matrix::Random(out, batch));
  for (auto _ : state) {
    ad::Tape tape;
    auto w = tape.leaf(model.weight().value, true), b = tape.leaf(model.bias().value, true);
    std::vector<ad::Var> nv;
    for (const auto& m : negs) nv.push_back(tape.constant(m));
    auto loss = probe::batch_loss(probe::probe_forward(w, b, tape.constant(x)), tape.constant(y), nv, 0.0);
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(w));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ProbeStep)->Args({256, 64})->Args({1200, 300})->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
