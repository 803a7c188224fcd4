#include "orderings.hpp"

#include <algorithm>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "ambiprobe/error.hpp"

namespace ambiprobe::cli {

std::optional<double> averaged_cell(const std::vector<eval::ReportBundle>& bundles,
                                    const std::string& kind, const std::string& row,
                                    const std::string& task) {
  if (bundles.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& b : bundles) {
    auto it = std::find_if(b.cells.begin(), b.cells.end(), [&](const eval::EvalCell& c) {
      return c.key.kind == kind && c.key.row == row && c.key.task == task;
    });
    if (it == b.cells.end()) return std::nullopt;
    sum += it->mean;
  }
  return sum / static_cast<double>(bundles.size());
}

std::vector<OrderingCheck> directional_checks(const std::vector<eval::ReportBundle>& bundles) {
  std::vector<OrderingCheck> out;
  auto cell = [&](const char* kind, const std::string& row, const char* task) {
    return averaged_cell(bundles, kind, row, task);
  };
  auto layers = [&](const char* kind, const char* prefix, const char* task) {
    std::vector<double> v;
    for (int l = 1; l <= 3; ++l) {
      if (auto c = cell(kind, prefix + std::to_string(l), task)) v.push_back(*c);
    }
    return v;
  };

  if (auto h1 = cell("current", "h1", "WORD"), h3 = cell("current", "h3", "WORD"); h1 && h3) {
    out.push_back({"a", "current h1 WORD > current h3 WORD", *h1, *h3, *h1 > *h3});
  }
  const auto cur_word = layers("current", "h", "WORD");
  const auto pred_word = layers("predictive", "pred", "WORD");
  if (!cur_word.empty() && !pred_word.empty()) {
    const double lo = *std::min_element(cur_word.begin(), cur_word.end());
    const double hi = *std::max_element(pred_word.begin(), pred_word.end());
    out.push_back({"b", "min current WORD > max predictive WORD", lo, hi, lo > hi});
  }
  const auto pred_sub = layers("predictive", "pred", "SUB");
  if (!pred_sub.empty() && pred_sub.size() == pred_word.size()) {
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    const double sub = mean(pred_sub), word = mean(pred_word);
    out.push_back({"c", "mean predictive SUB > mean predictive WORD", sub, word, sub > word});
  }
  return out;
}

std::string format_checks(const std::vector<OrderingCheck>& checks) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  for (const auto& c : checks) {
    out << '(' << c.name << ") " << c.description << ": " << c.left << " vs " << c.right << " -> "
        << (c.holds ? "holds" : "VIOLATED") << '\n';
  }
  return out.str();
}

eval::ReportBundle bundle_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "ambiprobe-results/1") {
      throw InputError("results: unsupported format '" + j.at("format").get<std::string>() + "'");
    }
    eval::ReportBundle b;
    b.lm_fingerprint = j.at("lm_fingerprint").get<std::string>();
    for (const auto& [k, v] : j.at("config_hashes").items()) b.config_hashes[k] = v.get<std::string>();
    for (const auto& c : j.at("cells")) {
      eval::EvalCell cell;
      cell.key = {c.at("kind").get<std::string>(), c.at("row").get<std::string>(),
                  c.at("task").get<std::string>()};
      cell.mean = c.at("mean").get<double>();
      cell.std = c.at("std").get<double>();
      cell.count = c.at("count").get<std::size_t>();
      cell.excluded = c.at("excluded").get<std::size_t>();
      b.cells.push_back(std::move(cell));
    }
    for (const auto& c : j.at("correlations")) {
      eval::CorrelationResult r;
      r.name = c.at("name").get<std::string>();
      r.rho = c.at("rho").get<double>();
      r.p_value = c.at("p_value").get<double>();
      r.n = c.at("n").get<std::size_t>();
      b.correlations.push_back(std::move(r));
    }
    for (const auto& [k, v] : j.at("statistics").items()) b.statistics[k] = v.get<double>();
    for (const auto& n : j.at("neighbors")) {
      eval::NeighborReport r;
      r.query = n.at("query").get<std::string>();
      for (const auto& e : n.at("neighbors")) {
        r.neighbors.push_back({0, e.at("word").get<std::string>(), e.at("cosine").get<double>()});
      }
      b.neighbors.push_back(std::move(r));
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("results: ") + e.what());
  }
}

}  // namespace ambiprobe::cli
