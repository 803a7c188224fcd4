#pragma once

// Independent reference computations for tests. Everything here is written
// with plain loops over std::vector so that it shares no code path with the
// library under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "ambiprobe/numcore/tensor.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline Vec to_vec(const ambiprobe::Matrix& m) { return Vec(m.data(), m.data() + m.size()); }

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const Vec& a, const Vec& b) {
  return dot(a, b) / (std::sqrt(dot(a, a)) * std::sqrt(dot(b, b)));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Mean and population standard deviation.
inline std::pair<double, double> mean_std(const Vec& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

// Textbook two-pass Pearson coefficient.
inline double pearson(const Vec& x, const Vec& y) {
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    dx += (x[i] - mx) * (x[i] - mx);
    dy += (y[i] - my) * (y[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

// Full scan over all columns of a column-major table, ranking by cosine
// descending and index ascending.
inline std::vector<int> brute_force_neighbors(const Vec& query, const std::vector<Vec>& table,
                                              std::size_t k, const std::vector<int>& skip) {
  std::vector<std::pair<double, int>> scored;
  for (std::size_t j = 0; j < table.size(); ++j) {
    if (std::find(skip.begin(), skip.end(), static_cast<int>(j)) != skip.end()) continue;
    scored.emplace_back(cosine(query, table[j]), static_cast<int>(j));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

inline ambiprobe::Matrix random_matrix(ambiprobe::Index rows, ambiprobe::Index cols,
                                       std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  ambiprobe::Matrix m(rows, cols);
  for (ambiprobe::Index i = 0; i < m.size(); ++i) m(i) = n(rng);
  return m;
}

}  // namespace oracle
