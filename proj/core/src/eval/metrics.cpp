#include "ambiprobe/eval/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

#include "ambiprobe/error.hpp"
#include "ambiprobe/numcore/functional.hpp"

namespace ambiprobe::eval {

EvalCell cosine_cell(CellKey key, std::span<const Vector> predictions,
                     std::span<const Vector> targets) {
  if (predictions.size() != targets.size()) {
    throw DimensionError("cosine_table: " + std::to_string(predictions.size()) +
                         " predictions for " + std::to_string(targets.size()) + " targets");
  }
  EvalCell cell{std::move(key), 0.0, 0.0, 0, 0};
  std::vector<double> cosines;
  cosines.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    try {
      cosines.push_back(fn::cosine(predictions[i], targets[i]));
    } catch (const UndefinedSimilarityError&) {
      ++cell.excluded;
    }
  }
  if (cosines.empty()) {
    throw InputError("cosine_table: no item with a defined cosine in " + cell.key.kind + "/" +
                     cell.key.row + "/" + cell.key.task);
  }
  const auto n = static_cast<double>(cosines.size());
  double sum = 0.0;
  for (double c : cosines) sum += c;
  cell.mean = sum / n;
  double sq = 0.0;
  for (double c : cosines) sq += (c - cell.mean) * (c - cell.mean);
  cell.std = std::sqrt(sq / n);
  cell.count = cosines.size();
  return cell;
}

std::vector<EvalCell> cosine_table(const std::vector<CellInput>& groups) {
  std::vector<EvalCell> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(cosine_cell(g.key, g.predictions, g.targets));
  return out;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("pearson: samples differ in length");
  if (x.size() < 3) throw InputError("pearson: need at least 3 pairs");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("pearson: zero variance");
  CorrelationResult r;
  r.n = x.size();
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  r.x.assign(x.begin(), x.end());
  r.y.assign(y.begin(), y.end());
  const double dof = n - 2.0;
  if (dof <= 0.0) {
    r.p_value = 1.0;
  } else if (std::abs(r.rho) >= 1.0) {
    r.p_value = 0.0;
  } else {
    const double t = r.rho * std::sqrt(dof / (1.0 - r.rho * r.rho));
    boost::math::students_t dist(dof);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return r;
}

std::string significance_stars(double p_value) {
  if (p_value < 0.001) return "***";
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

}  // namespace ambiprobe::eval
