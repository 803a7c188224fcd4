#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "ambiprobe/error.hpp"
#include "ambiprobe/numcore/grad_check.hpp"
#include "ambiprobe/probe/checkpoint.hpp"
#include "ambiprobe/probe/sampler.hpp"
#include "ambiprobe/probe/trainer.hpp"
#include "support/oracles.hpp"

using namespace ambiprobe;
using namespace ambiprobe::probe;
using states::StateKind;

namespace {

const ProbeBinding kBinding{ProbeTask::Word, StateKind::Current, 1};

// Ids 0 and 1 are specials; 2..9 carry frequencies 8..1.
NegativeSampler eight_word_sampler() {
  static const std::vector<std::uint64_t> freqs{0, 0, 8, 7, 6, 5, 4, 3, 2, 1};
  static const std::vector<lm::TokenId> skip{0, 1};
  return NegativeSampler(freqs, skip);
}

NegativeSampler uniform_sampler(std::size_t words) {
  std::vector<std::uint64_t> freqs(words + 2);
  for (std::size_t i = 2; i < freqs.size(); ++i) freqs[i] = 1000 - i;
  std::vector<lm::TokenId> skip{0, 1};
  return NegativeSampler(freqs, skip);
}

// Targets equal the inputs; anchors spread over the vocabulary.
ProbeData identity_data(std::size_t n, std::size_t dim, std::size_t vocab, Rng& rng) {
  ProbeData d;
  d.inputs = Matrix(static_cast<Index>(dim), static_cast<Index>(n));
  for (Index i = 0; i < d.inputs.size(); ++i) d.inputs.data()[i] = uniform(rng, -0.6, 0.6);
  d.targets = d.inputs;
  for (std::size_t j = 0; j < n; ++j) {
    d.anchor.push_back(static_cast<lm::TokenId>(2 + rng() % vocab));
    d.excluded.push_back({});
  }
  return d;
}

}  // namespace

TEST_SUITE("probe") {
  TEST_CASE("forward examples") {
    Rng rng(1);
    ProbeModel zero(kBinding, Parameter("w", Matrix::Zero(3, 4)), Parameter("b", Matrix::Zero(3, 1)));
    CHECK(zero.forward(Vector(Vector::Random(4))).isZero(0.0));
    ProbeModel id(kBinding, Parameter("w", Matrix::Identity(2, 2)), Parameter("b", Matrix::Zero(2, 1)));
    Vector x(2);
    x << 0.5, -0.5;
    auto r = id.forward(x);
    CHECK(r(0) == doctest::Approx(0.46211715726000974).epsilon(1e-12));
    CHECK(r(1) == doctest::Approx(-0.46211715726000974).epsilon(1e-12));
    ProbeModel rand(kBinding, 6, 3, rng);
    CHECK(rand.bias().value.isZero(0.0));
    CHECK(rand.weight().value.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(6.0));
    for (int t = 0; t < 50; ++t) {
      Vector in = Vector::Random(6) * 100.0;
      auto out = rand.forward(in);
      CHECK(out.cwiseAbs().maxCoeff() <= 1.0);
    }
    CHECK_THROWS_AS(rand.forward(Vector(Vector::Zero(5))), DimensionError);
    CHECK(kBinding.name() == "current-1-WORD");
    CHECK(parse_task("word_sub") == ProbeTask::WordSub);
    CHECK_THROWS_AS(parse_task("WORDS"), ConfigError);
  }

  TEST_CASE("max-margin loss examples and properties") {
    Vector r(3);
    r << 1.0, 2.0, -1.0;
    CHECK(max_margin_loss(r, r, true, 0.0) == doctest::Approx(0.0));
    CHECK(max_margin_loss(-r, r, false, 0.0) == 0.0);
    Vector a(2), b(2);
    a << 1.0, 0.0;
    b << 0.3, std::sqrt(1.0 - 0.09);
    CHECK(max_margin_loss(a, b, false, 0.0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(max_margin_loss(a, b, false, 0.5) == 0.0);
    CHECK_THROWS_AS(max_margin_loss(Vector::Zero(3), r, true, 0.0), UndefinedSimilarityError);

    std::mt19937_64 rng(2);
    for (int t = 0; t < 1000; ++t) {
      Vector u = Vector::Random(4), v = Vector::Random(4);
      const double m = (rng() % 4) * 0.2;
      const double c = oracle::cosine(oracle::to_vec(u), oracle::to_vec(v));
      const double pos = max_margin_loss(u, v, true, m);
      const double neg = max_margin_loss(u, v, false, m);
      CHECK(pos >= 0.0);
      CHECK(neg >= 0.0);
      CHECK(pos == doctest::Approx(1.0 - c).epsilon(1e-12));
      CHECK(neg == doctest::Approx(std::max(0.0, c - m)).epsilon(1e-12));
      CHECK((neg == 0.0) == (c <= m));
    }
  }

  TEST_CASE("batch loss matches a per-example oracle and its gradient") {
    Rng rng(3);
    const Index in = 8, out = 8, batch = 5;
    const std::size_t k = 3;
    Matrix x = Matrix::Random(in, batch), y = Matrix::Random(out, batch);
    std::vector<Matrix> negs;
    for (std::size_t r = 0; r < k; ++r) negs.push_back(Matrix::Random(out, batch));
    ProbeModel m(kBinding, in, out, rng);
    for (double margin : {0.0, 0.2}) {
      double expect = 0.0;
      const Matrix pred = m.forward(x);
      for (Index j = 0; j < batch; ++j) {
        double neg = 0.0;
        for (const auto& n : negs) neg += max_margin_loss(pred.col(j), n.col(j), false, margin);
        expect += max_margin_loss(pred.col(j), y.col(j), true, margin) + neg / static_cast<double>(k);
      }
      expect /= static_cast<double>(batch);
      ad::Tape tape;
      std::vector<ad::Var> nv;
      for (const auto& n : negs) nv.push_back(tape.constant(n));
      auto loss = batch_loss(probe_forward(tape.constant(m.weight().value), tape.constant(m.bias().value),
                                           tape.constant(x)),
                             tape.constant(y), nv, margin);
      CHECK(loss.value()(0, 0) == doctest::Approx(expect).epsilon(1e-12));

      std::vector<Matrix> params{m.weight().value, m.bias().value};
      auto res = grad_check(
          [&](ad::Tape& t, std::span<const ad::Var> p) {
            std::vector<ad::Var> nn;
            for (const auto& n : negs) nn.push_back(t.constant(n));
            return batch_loss(probe_forward(p[0], p[1], t.constant(x)), t.constant(y), nn, margin);
          },
          params);
      INFO("margin " << margin);
      CHECK(res.max_relative_error < 1e-4);
    }
  }

  TEST_CASE("sampler quartiles on the eight-word fixture") {
    auto s = eight_word_sampler();
    CHECK(s.bucket(0) == std::vector<lm::TokenId>{2, 3});
    CHECK(s.bucket(1) == std::vector<lm::TokenId>{4, 5});
    CHECK(s.bucket(2) == std::vector<lm::TokenId>{6, 7});
    CHECK(s.bucket(3) == std::vector<lm::TokenId>{8, 9});
    CHECK_THROWS_AS(s.bucket_of(0), SamplingError);
    Rng rng(4);
    // Frequency 6 is id 4; its only legal negative is id 5.
    for (int t = 0; t < 100; ++t) CHECK(s.sample(4, {}, 1, rng) == std::vector<lm::TokenId>{5});
    try {
      s.sample(4, {}, 2, rng);
      FAIL("expected SamplingError");
    } catch (const SamplingError& e) {
      CHECK(std::string(e.what()).find("quartile 2") != std::string::npos);
    }
  }

  TEST_CASE("sampler forced outcome, determinism and legality") {
    auto s = uniform_sampler(400);  // 100 words per bucket
    const auto& q = s.bucket(1);
    const lm::TokenId positive = q[0];
    std::vector<lm::TokenId> excluded(q.begin() + 6, q.end());
    Rng rng(5);
    auto forced = s.sample(positive, excluded, 5, rng);
    std::sort(forced.begin(), forced.end());
    CHECK(forced == std::vector<lm::TokenId>(q.begin() + 1, q.begin() + 6));

    Rng a(6), b(6);
    auto first = s.sample(positive, {}, 5, a);
    CHECK(first == s.sample(positive, {}, 5, b));
    CHECK(s.sample(positive, {}, 5, a) != first);

    std::mt19937_64 pick(7);
    std::size_t violations = 0;
    for (int t = 0; t < 10000; ++t) {
      const auto pos = static_cast<lm::TokenId>(2 + pick() % 400);
      std::vector<lm::TokenId> ex;
      for (int e = 0; e < 10; ++e) ex.push_back(static_cast<lm::TokenId>(2 + pick() % 400));
      auto draw = s.sample(pos, ex, 5, rng);
      std::set<lm::TokenId> distinct(draw.begin(), draw.end());
      violations += distinct.size() != 5;
      for (auto w : draw) {
        violations += s.bucket_of(w) != s.bucket_of(pos);
        violations += w == pos;
        violations += std::find(ex.begin(), ex.end(), w) != ex.end();
      }
    }
    CHECK(violations == 0);
  }

  TEST_CASE("training learns an identity map") {
    Rng rng(8);
    const std::size_t dim = 8, vocab = 80;
    auto train = identity_data(600, dim, vocab, rng);
    auto valid = identity_data(100, dim, vocab, rng);
    Matrix emb = Matrix::Random(dim, vocab + 2);
    auto sampler = uniform_sampler(vocab);
    ProbeTrainConfig cfg;
    cfg.batch_size = 16;
    cfg.learning_rate = 1e-2;
    cfg.max_epochs = 40;
    auto res = train_probe(kBinding, train, valid, emb, sampler, cfg);
    const Matrix pred = res.model.forward(valid.inputs);
    double mean_cos = 0.0;
    for (Index j = 0; j < pred.cols(); ++j) {
      mean_cos += oracle::cosine(oracle::to_vec(pred.col(j)), oracle::to_vec(valid.targets.col(j)));
    }
    mean_cos /= static_cast<double>(pred.cols());
    CHECK(mean_cos > 0.95);

    REQUIRE_FALSE(res.curve.empty());
    auto best = std::min_element(res.curve.begin(), res.curve.end(),
                                 [](auto& a, auto& b) { return a.valid_loss < b.valid_loss; });
    CHECK(best->epoch == res.best_epoch);
    const auto after_best = res.curve.size() - res.best_epoch;
    CHECK((after_best == cfg.patience || res.curve.size() == cfg.max_epochs));

    auto again = train_probe(kBinding, train, valid, emb, sampler, cfg);
    CHECK(again.model.weight().value == res.model.weight().value);
    CHECK(curve_csv(again.curve) == curve_csv(res.curve));
    CHECK(curve_csv(res.curve).rfind("epoch,train_loss,valid_loss\n", 0) == 0);
  }

  TEST_CASE("training loss descends for every seed") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(100 + seed);
      auto train = identity_data(200, 6, 40, rng);
      auto valid = identity_data(40, 6, 40, rng);
      Matrix emb = Matrix::Random(6, 42);
      ProbeTrainConfig cfg;
      cfg.learning_rate = 1e-3;
      cfg.batch_size = 16;
      cfg.max_epochs = 10;
      cfg.patience = 10;
      cfg.seed = seed;
      auto res = train_probe(kBinding, train, valid, emb, uniform_sampler(40), cfg);
      REQUIRE(res.curve.size() == 10);
      INFO("seed " << seed);
      CHECK(res.curve[9].train_loss < res.curve[0].train_loss);
    }
  }

  TEST_CASE("degenerate budgets and configuration errors") {
    Rng rng(9);
    auto train = identity_data(20, 4, 8, rng);
    Matrix emb = Matrix::Random(4, 10);
    ProbeTrainConfig cfg;
    cfg.max_epochs = 0;
    auto res = train_probe(kBinding, train, ProbeData{}, emb, uniform_sampler(8), cfg);
    CHECK(res.curve.empty());
    CHECK(res.best_epoch == 0);
    Rng init(derive_seed(cfg.seed, 1));
    CHECK(res.model.weight().value == ProbeModel(kBinding, 4, 4, init).weight().value);

    cfg.max_epochs = 5;
    ProbeData empty{Matrix(4, 0), Matrix(4, 0), {}, {}};
    CHECK_THROWS_AS(train_probe(kBinding, train, empty, emb, uniform_sampler(8), cfg), ConfigError);
    cfg.patience = 0;
    CHECK_THROWS_AS(train_probe(kBinding, train, train, emb, uniform_sampler(8), cfg), ConfigError);
    cfg.patience = 3;
    cfg.negatives = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.negatives = 5;
    cfg.margin = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.margin = 0.1;
    CHECK(ProbeTrainConfig::from_text(cfg.to_text()) == cfg);
    CHECK_THROWS_AS(ProbeTrainConfig::from_text("{\"batch_size\": 3}"), ConfigError);
  }

  TEST_CASE("hyperparameter grid") {
    auto c = paper_grid(ProbeTask::Word, StateKind::Current, 1);
    CHECK(c.batch_size == 16);
    CHECK(c.learning_rate == 5e-5);
    auto p = paper_grid(ProbeTask::Sub, StateKind::Predictive, 3);
    CHECK(p.batch_size == 16);
    CHECK(p.learning_rate == 1e-4);
    CHECK_THROWS_AS(paper_grid(ProbeTask::Word, StateKind::Current, 4), ConfigError);
  }

  TEST_CASE("checkpoint round trip") {
    Rng rng(10);
    ProbeBinding binding{ProbeTask::WordSub, StateKind::Predictive, 2};
    ProbeCheckpoint ck{ProbeModel(binding, 7, 3, rng), ProbeTrainConfig{}, "abc123", 4};
    ck.model.bias().value.setRandom();
    auto back = ProbeCheckpoint::parse(ck.serialize());
    CHECK(back.model.binding() == binding);
    CHECK(back.model.weight().value == ck.model.weight().value);
    CHECK(back.model.bias().value == ck.model.bias().value);
    CHECK(back.config == ck.config);
    CHECK(back.lm_fingerprint == "abc123");
    CHECK(back.best_epoch == 4);
    auto bytes = ck.serialize();
    bytes[bytes.size() / 2] ^= 0x11;
    CHECK_THROWS_AS(ProbeCheckpoint::parse(bytes), IntegrityError);
  }
}
