#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ambiprobe/error.hpp"
#include "ambiprobe/eval/metrics.hpp"
#include "ambiprobe/eval/neighbors.hpp"
#include "ambiprobe/eval/report.hpp"
#include "support/oracles.hpp"

using namespace ambiprobe;
using namespace ambiprobe::eval;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Unit vector at angle acos(c) from e1.
Vector at_cosine(double c) { return vec({c, std::sqrt(1.0 - c * c)}); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ReportBundle sample_bundle() {
  ReportBundle b;
  std::vector<Vector> same{vec({1, 2}), vec({3, -1})};
  b.cells.push_back(cosine_cell({"current", "h1", "WORD"}, same, same));
  std::vector<double> x{0.1, 0.5, 0.3, 0.9}, y{0.2, 0.4, 0.5, 0.8};
  auto c = pearson(x, y);
  c.name = "h1";
  c.item_ids = {"a", "b", "c", "d"};
  b.correlations.push_back(c);
  b.statistics["overlap_s_w"] = 0.17;
  b.neighbors.push_back({"w(show)", {{3, "exhibit", 0.9}}});
  b.lm_fingerprint = "feedbeef";
  b.config_hashes = {{"lm.config", "aa"}, {"probe.current-1-WORD", "bb"}};
  return b;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("cosine cells") {
    std::vector<Vector> p{vec({1, 0}), vec({1, 0})};
    std::vector<Vector> t{at_cosine(0.2), at_cosine(0.8)};
    auto cell = cosine_cell({"current", "h1", "WORD"}, p, t);
    CHECK(cell.mean == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cell.std == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(cell.count == 2);

    auto self = cosine_cell({"baseline", "w_t", "SUB"}, t, t);
    CHECK(self.mean == doctest::Approx(1.0));
    CHECK(self.std == doctest::Approx(0.0).epsilon(1e-7));

    std::vector<Vector> with_zero{vec({1, 0}), vec({0, 0}), vec({0, 1})};
    std::vector<Vector> targets{vec({1, 0}), vec({1, 1}), vec({1, 0})};
    auto skip = cosine_cell({"current", "h1", "WORD"}, with_zero, targets);
    CHECK(skip.count == 2);
    CHECK(skip.excluded == 1);
    CHECK(skip.mean == doctest::Approx(0.5));
    CHECK_THROWS_AS(cosine_cell({}, std::span(with_zero).subspan(1, 1), std::span(targets).subspan(1, 1)),
                    InputError);
    CHECK_THROWS_AS(cosine_cell({}, p, std::span(targets).subspan(0, 1)), DimensionError);
  }

  TEST_CASE("cosine table matches a brute-force recomputation") {
    std::mt19937_64 rng(1);
    std::vector<CellInput> groups;
    for (const char* task : {"WORD", "SUB"}) {
      CellInput g{{"current", "h2", task}, {}, {}};
      for (int i = 0; i < 1000; ++i) {
        g.predictions.push_back(oracle::random_matrix(12, 1, rng).col(0));
        g.targets.push_back(oracle::random_matrix(12, 1, rng).col(0));
      }
      groups.push_back(std::move(g));
    }
    auto table = cosine_table(groups);
    REQUIRE(table.size() == 2);
    for (std::size_t g = 0; g < 2; ++g) {
      oracle::Vec cos;
      for (std::size_t i = 0; i < 1000; ++i) {
        cos.push_back(oracle::cosine(oracle::to_vec(groups[g].predictions[i]),
                                     oracle::to_vec(groups[g].targets[i])));
      }
      auto [mean, sd] = oracle::mean_std(cos);
      CHECK(table[g].key == groups[g].key);
      CHECK(std::abs(table[g].mean - mean) < 1e-6);
      CHECK(std::abs(table[g].std - sd) < 1e-6);
    }
  }

  TEST_CASE("nearest neighbours") {
    Matrix emb(2, 3);
    emb.col(0) = vec({1, 0});
    emb.col(1) = vec({1, 1});
    emb.col(2) = vec({-1, 0.2});
    auto self = nearest_neighbors(emb.col(1), emb, 1, {});
    CHECK(self.neighbors[0].id == 1);
    CHECK(self.neighbors[0].cosine == doctest::Approx(1.0));
    // Query (1, 0.1): cosines 0.995, 0.777, -0.883.
    auto ranked = nearest_neighbors(vec({1, 0.1}), emb, 3, {});
    CHECK(ranked.neighbors[0].id == 0);
    CHECK(ranked.neighbors[1].id == 1);
    CHECK(ranked.neighbors[2].id == 2);
    std::vector<lm::TokenId> excl{0};
    auto skipped = nearest_neighbors(vec({1, 0.1}), emb, 1, excl);
    CHECK(skipped.neighbors[0].id == 1);
    CHECK_THROWS_AS(nearest_neighbors(vec({1, 0}), emb, 0, {}), ContractError);
    CHECK_THROWS_AS(nearest_neighbors(vec({1, 0}), emb, 3, excl), ContractError);
    CHECK_THROWS_AS(nearest_neighbors(vec({0, 0}), emb, 1, {}), UndefinedSimilarityError);

    CHECK(neighbor_overlap(vec({1, 0.1}), vec({1, 0.1}), emb, 2, {}) == 1.0);
    Matrix split(2, 4);
    split.col(0) = vec({1, 0.1});
    split.col(1) = vec({1, -0.1});
    split.col(2) = vec({-1, 0.1});
    split.col(3) = vec({-1, -0.1});
    CHECK(neighbor_overlap(vec({1, 0}), vec({-1, 0}), split, 2, {}) == 0.0);
  }

  TEST_CASE("nearest neighbours equal a full scan, ties included") {
    std::mt19937_64 rng(2);
    for (Index v : {50, 1000, 10000}) {
      Matrix emb = oracle::random_matrix(16, v, rng);
      // Exact duplicates force cosine ties.
      for (Index j = 0; j < v / 10; ++j) emb.col(static_cast<Index>(rng() % v)) = emb.col(j);
      std::vector<oracle::Vec> table;
      for (Index j = 0; j < v; ++j) table.push_back(oracle::to_vec(emb.col(j)));
      for (int q = 0; q < 5; ++q) {
        const auto base = static_cast<Index>(rng() % v);
        Vector query = emb.col(base);
        std::vector<lm::TokenId> excl{static_cast<lm::TokenId>(rng() % v)};
        auto got = nearest_neighbors(query, emb, 20, excl);
        auto want = oracle::brute_force_neighbors(oracle::to_vec(query), table, 20, {excl[0]});
        std::vector<int> ids;
        for (const auto& n : got.neighbors) ids.push_back(n.id);
        CHECK(ids == want);
      }
    }
  }

  TEST_CASE("pearson") {
    std::vector<double> x{1, 2, 3, 4}, y2{2, 4, 6, 8}, neg{-1, -2, -3, -4};
    CHECK(pearson(x, y2).rho == doctest::Approx(1.0));
    CHECK(pearson(x, neg).rho == doctest::Approx(-1.0));
    CHECK(pearson(x, neg).n == 4);
    std::vector<double> flat{3, 3, 3, 3};
    CHECK_THROWS_AS(pearson(x, flat), UndefinedCorrelationError);
    CHECK_THROWS_AS(pearson(std::span(x).first(2), std::span(y2).first(2)), InputError);
    CHECK_THROWS_AS(pearson(x, std::span(y2).first(3)), InputError);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t len = 3 + rng() % 200;
      std::vector<double> u(len), w(len);
      for (std::size_t i = 0; i < len; ++i) {
        u[i] = n(rng);
        w[i] = 0.4 * u[i] + n(rng);
      }
      auto r = pearson(u, w);
      CHECK(std::abs(r.rho - oracle::pearson(u, w)) < 1e-9);
      CHECK(r.p_value >= 0.0);
      CHECK(r.p_value <= 1.0);
    }
    CHECK(significance_stars(0.0005) == "***");
    CHECK(significance_stars(0.005) == "**");
    CHECK(significance_stars(0.02) == "*");
    CHECK(significance_stars(0.2).empty());
  }

  TEST_CASE("p-values against the t distribution") {
    // Phi coefficient of two binary samples with n = 10 is 0.2; t has 8 degrees of freedom.
    std::vector<double> x{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    std::vector<double> y{0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0};
    auto r = pearson(x, y);
    const double t = r.rho * std::sqrt(8.0 / (1.0 - r.rho * r.rho));
    CHECK(r.rho == doctest::Approx(0.2));
    CHECK(t == doctest::Approx(0.57735).epsilon(1e-4));
    CHECK(r.p_value == doctest::Approx(0.579584).epsilon(1e-5));
  }

  TEST_CASE("report outputs are deterministic and carry provenance") {
    const auto dir = std::filesystem::temp_directory_path() / "ambiprobe_eval_report";
    std::filesystem::remove_all(dir);
    auto bundle = sample_bundle();
    emit_report(bundle, dir / "a");
    emit_report(sample_bundle(), dir / "b");
    const auto a = slurp(dir / "a" / "results.json");
    CHECK(a == slurp(dir / "b" / "results.json"));
    CHECK(a.find("\"feedbeef\"") != std::string::npos);
    CHECK(a.find("\"lm.config\"") != std::string::npos);
    CHECK(a.find("\"probe.current-1-WORD\"") != std::string::npos);
    CHECK(a.find("population") != std::string::npos);
    CHECK(a == results_json(bundle));
    const auto summary = slurp(dir / "a" / "summary.txt");
    CHECK(summary.find("h1") != std::string::npos);
    CHECK(summary == summary_text(bundle));
    const auto scatter = slurp(dir / "a" / "scatter-h1.csv");
    CHECK(scatter.rfind("item_id,cos_w_s,cos_pred_target\n", 0) == 0);
    CHECK(std::count(scatter.begin(), scatter.end(), '\n') == 5);

    ReportBundle empty;
    CHECK_THROWS_AS(emit_report(empty, dir / "c"), ContractError);
    std::filesystem::remove_all(dir);
  }
}
