#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>

namespace ambiprobe {

// All numeric work runs in 64-bit. Vectors are column vectors; batched
// activations store one example per column.
using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

// Single RNG type threaded through every stochastic step.
using Rng = std::mt19937_64;

inline std::string shape_string(Index rows, Index cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

template <typename Derived>
std::string shape_string(const Eigen::DenseBase<Derived>& m) {
  return shape_string(m.rows(), m.cols());
}

// Uniform draw in [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Derives an independent stream for a sub-task from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace ambiprobe
