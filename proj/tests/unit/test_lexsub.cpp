#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ambiprobe/error.hpp"
#include "ambiprobe/lexsub/coinco.hpp"
#include "ambiprobe/lexsub/dataset.hpp"
#include "ambiprobe/lexsub/filter.hpp"
#include "ambiprobe/lexsub/split.hpp"
#include "ambiprobe/lexsub/targets.hpp"
#include "ambiprobe/numcore/functional.hpp"

using namespace ambiprobe;
using namespace ambiprobe::lexsub;

namespace {

lm::Vocabulary make_vocab(const std::vector<std::string>& words) {
  return lm::Vocabulary::build(std::vector<lm::Sentence>{words}, 1000);
}

SubstitutionItem make_item(std::string id, std::string form, std::string lemma,
                           std::vector<std::string> subs, std::vector<std::string> context = {}) {
  SubstitutionItem it;
  it.id = std::move(id);
  it.target_form = std::move(form);
  it.target_lemma = std::move(lemma);
  it.pos = "v";
  if (context.empty()) context = {"they", it.target_form, "fast", "."};
  it.context = std::move(context);
  it.target_index = static_cast<std::size_t>(
      std::find(it.context.begin(), it.context.end(), it.target_form) - it.context.begin());
  for (auto& s : subs) it.substitutes.push_back({s, 1, is_multi_word(s)});
  return it;
}

const std::vector<std::string> kWords{"they", "run", "walk", "jog", "sprint", "dash",
                                      "race", "hurry", "rush", "fast", "slow", "play",
                                      "bank", "river", "money", "."};

}  // namespace

TEST_SUITE("lexsub") {
  TEST_CASE("loader parses, deduplicates and locates errors") {
    const std::string fixture =
        "# comment\n"
        "a.1\trun\trun\tv\t1\tthey run fast .\twalk,jog:3,sprint\n"
        "a.2\tbank\tbank\tn\t2\tthe river bank .\tshore,edge\n"
        "\n"
        "a.3\tplayed\tplay\tv\t1\twe played chess .\tperform,act\tcompound\n";
    auto items = parse_lexsub(fixture);
    REQUIRE(items.size() == 3);
    CHECK(items[0].context == std::vector<std::string>{"they", "run", "fast", "."});
    CHECK(items[0].substitutes[1] == Substitute{"jog", 3, false});
    CHECK(items[2].compound);
    CHECK_FALSE(items[1].compound);
    CHECK(parse_lexsub(format_lexsub(items)) == items);

    try {
      parse_lexsub("x.1\trun\trun\tv\t1\tthey run .\twalk\nx.2\trun\trun\tv\t1\tthey run .\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_lexsub("x.1\trun\trun\tv\t7\tthey run .\twalk\n"), ParseError);
    CHECK_THROWS_AS(parse_lexsub("# only a comment\n"), InputError);

    auto dup = parse_lexsub("d.1\trun\trun\tv\t1\tthey run .\trun, run\n");
    REQUIRE(dup[0].substitutes.size() == 1);
    CHECK(dup[0].substitutes[0].lemma == "run");
    CHECK(dup[0].substitutes[0].count == 2);
    CHECK(is_multi_word("give up"));
    CHECK(is_multi_word("give_up"));
    CHECK_FALSE(is_multi_word("give"));
  }

  TEST_CASE("filter rules in isolation") {
    auto vocab = make_vocab(kWords);
    const std::vector<std::string> five{"walk", "jog", "sprint", "dash", "race"};
    CHECK(filter_items({make_item("a", "run", "run", five)}, vocab).size() == 1);
    CHECK(filter_items({make_item("b", "run", "run", {"walk", "jog", "sprint", "dash"})}, vocab)
              .empty());
    CHECK(filter_items({make_item("c", "played", "play", five)}, vocab).empty());
    auto multi = make_item("d", "run", "run", {"walk", "jog", "sprint", "dash", "race", "go_on"});
    auto kept = filter_items({multi}, vocab);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].substitutes.size() == 5);

    // Unknown single-word substitutes stay but do not count.
    auto zoom = make_item("z", "run", "run", {"walk", "jog", "sprint", "dash", "zoom"});
    CHECK(filter_items({zoom}, vocab).empty());
    CHECK(filter_items({zoom}, vocab, 4).size() == 1);
    CHECK(usable_substitutes(zoom, vocab) ==
          std::vector<std::string>{"walk", "jog", "sprint", "dash"});
  }

  TEST_CASE("ten-item fixture has six survivors") {
    auto vocab = make_vocab(kWords);
    const std::vector<std::string> five{"walk", "jog", "sprint", "dash", "race"};
    auto compound = make_item("c", "run", "run", five);
    compound.compound = true;
    std::vector<SubstitutionItem> items{
        make_item("k1", "run", "run", five),
        make_item("k2", "walk", "walk", {"run", "jog", "sprint", "dash", "hurry"}),
        make_item("k3", "run", "run", {"walk", "jog", "sprint", "dash", "race", "rush"}),
        make_item("k4", "Run", "run", five),
        make_item("k5", "run", "run", {"walk", "jog", "sprint", "dash", "race", "run off"}),
        make_item("k6", "jog", "jog", {"run", "walk", "sprint", "dash", "race", "zoom"}),
        make_item("few", "run", "run", {"walk", "jog", "sprint", "dash"}),
        make_item("form", "played", "play", five),
        compound,
        make_item("oov", "scurry", "scurry", five),
    };
    auto kept = filter_items(items, vocab);
    REQUIRE(kept.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(kept[i].id == "k" + std::to_string(i + 1));
    CHECK(filter_items(kept, vocab) == kept);
  }

  TEST_CASE("filter is idempotent on random items") {
    auto vocab = make_vocab(kWords);
    std::mt19937_64 rng(3);
    const std::vector<std::string> pool{"walk", "jog", "sprint", "dash", "race", "hurry",
                                        "zoom", "go on", "rush", "run", "x_y", "slow"};
    std::vector<SubstitutionItem> items;
    for (int i = 0; i < 300; ++i) {
      std::vector<std::string> subs;
      const auto n = rng() % 9;
      for (std::size_t k = 0; k < n; ++k) subs.push_back(pool[rng() % pool.size()]);
      auto it = make_item("r" + std::to_string(i), rng() % 5 ? "run" : "scurry",
                          rng() % 6 ? "" : "other", subs);
      if (it.target_lemma.empty()) it.target_lemma = it.target_form;
      it.compound = rng() % 7 == 0;
      // Deduplicate as the loader would.
      std::vector<Substitute> dedup;
      for (auto& s : it.substitutes) {
        if (std::none_of(dedup.begin(), dedup.end(), [&](auto& d) { return d.lemma == s.lemma; })) {
          dedup.push_back(s);
        }
      }
      it.substitutes = dedup;
      items.push_back(it);
    }
    auto once = filter_items(items, vocab);
    CHECK_FALSE(once.empty());
    CHECK(filter_items(once, vocab) == once);
    for (const auto& it : once) {
      CHECK(usable_substitutes(it, vocab).size() >= 5);
      for (const auto& s : it.substitutes) CHECK_FALSE(s.multi_word);
    }
  }

  TEST_CASE("split respects ratios, groups and seed") {
    std::vector<SubstitutionItem> items;
    for (int g = 0; g < 10; ++g) {
      items.push_back(make_item("g" + std::to_string(g), "run", "run", {"walk"},
                                {"ctx" + std::to_string(g), "run"}));
    }
    auto a = split_items(items, {0.7, 0.1, 0.2}, 11);
    std::array<int, 3> sizes{};
    for (const auto& [id, s] : a) ++sizes[static_cast<int>(s)];
    CHECK(sizes == std::array<int, 3>{7, 1, 2});
    CHECK(a == split_items(items, {0.7, 0.1, 0.2}, 11));

    std::mt19937_64 rng(12);
    std::vector<SubstitutionItem> many;
    for (int i = 0; i < 500; ++i) {
      const auto ctx = "c" + std::to_string(rng() % 150);
      many.push_back(make_item("m" + std::to_string(i), "run", "run", {"walk"}, {ctx, "run"}));
    }
    auto b = split_items(many, {0.7, 0.1, 0.2}, 5);
    CHECK(b.size() == many.size());
    std::map<std::string, Split> by_context;
    for (const auto& it : many) {
      auto [pos, fresh] = by_context.emplace(it.context_key(), b.at(it.id));
      CHECK(pos->second == b.at(it.id));
    }
    std::size_t total = 0;
    for (auto s : {Split::Train, Split::Valid, Split::Test}) total += select(many, b, s).size();
    CHECK(total == many.size());

    CHECK_THROWS_AS(split_items({items[0], items[1]}, {0.7, 0.1, 0.2}, 1), SplitError);
    CHECK_THROWS_AS(split_items(items, {0.7, 0.1, 0.1}, 1), SplitError);
    CHECK_THROWS_AS(split_items(items, {1.2, -0.1, -0.1}, 1), SplitError);
  }

  TEST_CASE("target vectors follow their definitions") {
    auto vocab = make_vocab(kWords);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    Matrix emb(6, static_cast<Index>(vocab.size()));
    for (Index i = 0; i < emb.size(); ++i) emb.data()[i] = n(rng);
    auto col = [&](const char* w) { return Vector(emb.col(vocab.index(w))); };

    auto single = build_targets(make_item("s", "run", "run", {"walk"}), vocab, emb);
    CHECK(single.s == col("walk"));
    CHECK(single.w == col("run"));
    CHECK(single.ws == Vector((col("walk") + col("run")) / 2.0));

    // Target proposed as its own substitute joins the union once.
    auto self = build_targets(make_item("t", "run", "run", {"walk", "run"}), vocab, emb);
    CHECK(self.ws.isApprox(Vector((col("walk") + col("run")) / 2.0), 1e-12));

    Matrix opposite = emb;
    opposite.col(vocab.index("jog")) = -opposite.col(vocab.index("walk"));
    auto cancel = build_targets(make_item("c", "run", "run", {"walk", "jog"}), vocab, opposite);
    CHECK(cancel.s.norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(fn::cosine(cancel.s, cancel.w), UndefinedSimilarityError);

    std::vector<std::string> subs{"walk", "jog", "sprint", "dash", "race", "hurry", "zoom"};
    for (int trial = 0; trial < 20; ++trial) {
      std::shuffle(subs.begin(), subs.end(), rng);
      auto t = build_targets(make_item("p", "run", "run", subs), vocab, emb);
      const double k = 6.0;  // "zoom" is unknown
      CHECK((t.ws - (k * t.s + t.w) / (k + 1.0)).cwiseAbs().maxCoeff() < 1e-9);
      auto ref = build_targets(make_item("p", "run", "run", {"dash", "hurry", "jog", "race", "sprint", "walk"}), vocab, emb);
      CHECK((t.s - ref.s).cwiseAbs().maxCoeff() < 1e-12);
    }

    CHECK_THROWS_AS(build_targets(make_item("e", "run", "run", {"zoom"}), vocab, emb), ContractError);
    CHECK_THROWS_AS(build_targets(make_item("e", "scurry", "scurry", {"walk"}), vocab, emb),
                    ContractError);
    CHECK_THROWS_AS(build_targets(make_item("e", "run", "run", {"walk"}), vocab, Matrix(6, 3)),
                    DimensionError);
  }

  TEST_CASE("context baseline averages eligible neighbours") {
    auto vocab = make_vocab(kWords);
    Matrix emb = Matrix::Random(4, static_cast<Index>(vocab.size()));
    auto col = [&](const char* w) { return Vector(emb.col(vocab.index(w))); };

    auto two = make_item("b", "run", "run", {"walk"}, {"they", "run", "fast", ",", "zzz"});
    auto base = avg_context_baseline(two, vocab, emb);
    REQUIRE(base);
    CHECK(base->isApprox(Vector((col("they") + col("fast")) / 2.0), 1e-12));

    std::vector<std::string> ctx{"run"};
    for (int i = 0; i < 12; ++i) ctx.push_back(i == 10 ? "slow" : "fast");
    auto clipped = make_item("c", "run", "run", {"walk"}, ctx);
    auto c = avg_context_baseline(clipped, vocab, emb);
    REQUIRE(c);
    CHECK(c->isApprox(col("fast"), 1e-12));  // position 11 is outside the window

    auto none = make_item("n", "run", "run", {"walk"}, {"zzz", "run", "!"});
    CHECK_FALSE(avg_context_baseline(none, vocab, emb).has_value());
  }

  TEST_CASE("encoded context keeps the target away from the ends") {
    auto vocab = make_vocab(kWords);
    auto it = make_item("e", "run", "run", {"walk"}, {"they", "run", ".", "slow", "walk", "."});
    auto enc = encode_context(it, vocab);
    const auto B = lm::Vocabulary::kBoundaryId;
    CHECK(enc.tokens == std::vector<lm::TokenId>{B, vocab.index("they"), vocab.index("run"),
                                                 vocab.index("."), B, vocab.index("slow"),
                                                 vocab.index("walk"), vocab.index("."), B});
    CHECK(enc.target_position == 2);
  }

  TEST_CASE("coinco adapter") {
    const std::string xml = R"(<?xml version="1.0"?>
<document>
 <sent MASCfile="f" MASCsentID="s1">
  <precontext>It was late .</precontext>
  <targetsentence>They run fast .</targetsentence>
  <tokens>
   <token id="1" wordform="They" lemma="they" posMASC="PRP" posTT="PP"/>
   <token id="2" wordform="run" lemma="run" posMASC="VBP" posTT="VVP" problematic="no">
    <substitutions>
     <subst lemma="sprint" pos="v" freq="2"/>
     <subst lemma="go quickly" pos="v" freq="1"/>
    </substitutions>
   </token>
   <token id="3" wordform="fast" lemma="fast" posMASC="RB" posTT="RB" problematic="yes">
    <substitutions><subst lemma="quickly" pos="r" freq="3"/></substitutions>
   </token>
  </tokens>
  <postcontext>Nobody followed .</postcontext>
 </sent>
</document>)";
    auto items = parse_coinco(xml);
    REQUIRE(items.size() == 2);
    CHECK(items[0].id == "s1.2");
    CHECK(items[0].context[items[0].target_index] == "run");
    CHECK(items[0].context.front() == "it");  // contexts pass through the LM tokenizer
    CHECK(items[0].context.back() == ".");
    CHECK(items[0].substitutes ==
          std::vector<Substitute>{{"sprint", 2, false}, {"go quickly", 1, true}});
    CHECK_FALSE(items[0].compound);
    CHECK(items[1].compound);
    CHECK_THROWS_AS(parse_coinco("<document><sent>"), InputError);
  }
}
