#include <doctest.h>

#include <random>

#include "ambiprobe/error.hpp"
#include "ambiprobe/lm/checkpoint.hpp"
#include "ambiprobe/states/archive.hpp"

using namespace ambiprobe;
using namespace ambiprobe::states;

namespace {

lm::LMConfig small_config() {
  lm::LMConfig c;
  c.embedding_dim = 5;
  c.hidden_sizes = {6, 4, 3};
  return c;
}

std::vector<lm::TokenId> random_tokens(std::size_t n, int vocab, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, vocab - 1);
  std::vector<lm::TokenId> out(n);
  for (auto& t : out) t = pick(rng);
  return out;
}

StateRecord random_record(const std::string& id, std::uint32_t layer, StateKind kind,
                          std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<float> n(0.0f, 3.0f);
  StateRecord r{id, static_cast<std::uint32_t>(rng() % 50), layer, kind, rng() % 2 == 0, {}};
  r.values.resize(dim);
  for (auto& v : r.values) v = n(rng);
  return r;
}

}  // namespace

TEST_SUITE("states") {
  TEST_CASE("full-scale configuration doubles each layer") {
    Rng rng(1);
    lm::LanguageModel m(lm::LMConfig::paper(), 20, rng);
    std::mt19937_64 r(2);
    auto seq = random_tokens(8, 20, r);
    auto cur = extract_current(m, seq, 3);
    REQUIRE(cur.size() == 3);
    CHECK(cur[0].size() == 1200);
    CHECK(cur[1].size() == 1200);
    CHECK(cur[2].size() == 600);
    auto pred = extract_predictive(m, seq, 3);
    for (std::size_t l = 0; l < 3; ++l) CHECK(pred[l].size() == cur[l].size());
  }

  TEST_CASE("current state halves follow direction causality") {
    Rng rng(3);
    lm::LanguageModel m(small_config(), 15, rng);
    std::mt19937_64 r(4);
    for (int trial = 0; trial < 20; ++trial) {
      auto seq = random_tokens(9, 15, r);
      const std::size_t t = r() % 9;
      auto base = extract_current(m, seq, t);
      auto later = seq;
      for (std::size_t p = t + 1; p < later.size(); ++p) later[p] = static_cast<int>((later[p] + 3) % 15);
      auto alt = extract_current(m, later, t);
      auto earlier = seq;
      for (std::size_t p = 0; p < t; ++p) earlier[p] = static_cast<int>((earlier[p] + 5) % 15);
      auto alt2 = extract_current(m, earlier, t);
      for (std::size_t l = 0; l < 3; ++l) {
        const Index h = base[l].size() / 2;
        CHECK(base[l].head(h) == alt[l].head(h));
        CHECK(base[l].tail(h) == alt2[l].tail(h));
      }
      CHECK(extract_current(m, seq, t)[0] == base[0]);
    }
  }

  TEST_CASE("predictive states exclude the target position") {
    Rng rng(5);
    lm::LanguageModel m(small_config(), 15, rng);
    std::mt19937_64 r(6);
    auto seq = random_tokens(7, 15, r);
    auto first = extract_predictive(m, seq, 0);
    auto last = extract_predictive(m, seq, 6);
    for (std::size_t l = 0; l < 3; ++l) {
      const Index h = first[l].size() / 2;
      CHECK(first[l].head(h).isZero(0.0));
      CHECK_FALSE(first[l].tail(h).isZero(0.0));
      CHECK(last[l].tail(h).isZero(0.0));
    }
    for (std::size_t t = 0; t < seq.size(); ++t) {
      auto changed = seq;
      changed[t] = lm::Vocabulary::kUnkId == seq[t] ? 3 : lm::Vocabulary::kUnkId;
      auto a = extract_predictive(m, seq, t), b = extract_predictive(m, changed, t);
      for (std::size_t l = 0; l < 3; ++l) CHECK(a[l] == b[l]);
    }
    auto states = m.forward(seq, false);
    auto cur = current_states(states, 2);
    auto pred = predictive_states(states, 3);
    // Forward half of the predictive state at 3 is the current forward state at 2.
    CHECK(pred[1].head(4) == cur[1].head(4));
  }

  TEST_CASE("positions outside the sequence are rejected") {
    Rng rng(7);
    lm::LanguageModel m(small_config(), 10, rng);
    std::vector<lm::TokenId> seq{2, 3, 4};
    CHECK_THROWS_AS(extract_current(m, seq, 3), InputError);
    CHECK_THROWS_AS(extract_predictive(m, seq, 99), InputError);
  }

  TEST_CASE("archive round trips") {
    const auto path = std::filesystem::temp_directory_path() / "ambiprobe_states_test.amst";
    StateArchive empty("abc", {4, 2});
    write_archive(path, empty);
    auto e = read_archive(path);
    CHECK(e.size() == 0);
    CHECK(e.fingerprint() == "abc");
    CHECK(e.layer_dims() == std::vector<std::uint32_t>{4, 2});

    std::mt19937_64 rng(8);
    StateArchive a("fp", {12, 8, 6});
    for (int i = 0; i < 1000; ++i) {
      const auto layer = static_cast<std::uint32_t>(1 + i % 3);
      const auto kind = (i / 3) % 2 == 0 ? StateKind::Current : StateKind::Predictive;
      a.add(random_record("item" + std::to_string(i / 6), layer, kind, a.layer_dims()[layer - 1], rng));
    }
    write_archive(path, a);
    auto b = read_archive(path);
    REQUIRE(b.size() == 1000);
    CHECK(b.records() == a.records());
    for (const auto& rec : a.records()) {
      CHECK(b.at(rec.item_id, rec.kind, rec.layer) == rec);
    }
    CHECK_THROWS_AS(b.at("missing", StateKind::Current, 1), InputError);
    CHECK_NOTHROW(b.require_compatible("fp"));
    CHECK_THROWS_AS(b.require_compatible("other"), CompatibilityError);
    CHECK_THROWS_AS(a.add(a.records().front()), ContractError);
    CHECK_THROWS_AS(a.add(StateRecord{"x", 0, 1, StateKind::Current, false, {1.0f}}), ContractError);

    auto bytes = a.serialize();
    CHECK(bytes.substr(0, 4) == "AMST");
    CHECK_THROWS_AS(StateArchive::parse(bytes.substr(0, bytes.size() / 2)), IntegrityError);
    auto flipped = bytes;
    flipped[100] ^= 0x40;
    CHECK_THROWS_AS(StateArchive::parse(flipped), IntegrityError);
    std::filesystem::remove(path);
  }

  TEST_CASE("extraction over items is complete, pure and target-blind") {
    Rng rng(9);
    lm::LanguageModel m(small_config(), 12, rng);
    const auto before = lm::fingerprint(m);
    std::mt19937_64 r(10);
    std::vector<ExtractionItem> items;
    for (int i = 0; i < 10; ++i) {
      auto toks = random_tokens(4 + r() % 6, 12, r);
      const std::size_t pos = r() % toks.size();
      items.push_back({"it" + std::to_string(i), toks, pos, pos == 0 || pos + 1 == toks.size()});
    }
    auto archive = extract_archive(m, before, items);
    CHECK(lm::fingerprint(m) == before);
    CHECK(archive.size() == items.size() * 2 * 3);
    auto masked = items;
    for (auto& it : masked) it.tokens[it.position] = lm::Vocabulary::kUnkId;
    auto masked_archive = extract_archive(m, before, masked);
    for (const auto& it : items) {
      for (std::uint32_t l = 1; l <= 3; ++l) {
        const auto& c = archive.at(it.item_id, StateKind::Current, l);
        const auto& p = archive.at(it.item_id, StateKind::Predictive, l);
        CHECK(c.values.size() == 2 * small_config().hidden_sizes[l - 1]);
        CHECK(p.values.size() == c.values.size());
        CHECK(p.at_boundary == it.at_boundary);
        CHECK(masked_archive.at(it.item_id, StateKind::Predictive, l).values == p.values);
      }
    }
  }
}
