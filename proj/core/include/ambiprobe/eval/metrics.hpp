#pragma once

#include <span>
#include <string>
#include <vector>

#include "ambiprobe/numcore/tensor.hpp"

namespace ambiprobe::eval {

// Table position of a cell: kind is "baseline", "current" or "predictive";
// row names the input ("w_t", "avg_ctxt", "h1", "pred2", ...); task is
// "WORD", "SUB" or "WORD_SUB".
struct CellKey {
  std::string kind;
  std::string row;
  std::string task;

  bool operator==(const CellKey&) const = default;
};

struct EvalCell {
  CellKey key;
  double mean = 0.0;
  // Population standard deviation.
  double std = 0.0;
  std::size_t count = 0;
  // Items dropped because their cosine was undefined.
  std::size_t excluded = 0;
};

// Mean and population standard deviation of the item-wise cosines between
// predictions[j] and targets[j]. Items with an undefined cosine are skipped
// and tallied. Throws DimensionError on misaligned inputs and InputError
// when no item remains.
EvalCell cosine_cell(CellKey key, std::span<const Vector> predictions,
                     std::span<const Vector> targets);

struct CellInput {
  CellKey key;
  std::vector<Vector> predictions;
  std::vector<Vector> targets;
};
std::vector<EvalCell> cosine_table(const std::vector<CellInput>& groups);

struct CorrelationResult {
  std::string name;
  double rho = 0.0;
  // Two-sided, from the t statistic with n - 2 degrees of freedom.
  double p_value = 1.0;
  std::size_t n = 0;
  std::vector<std::string> item_ids;
  std::vector<double> x;
  std::vector<double> y;
};

// Sample Pearson correlation. Throws InputError for fewer than 3 pairs or
// unequal lengths and UndefinedCorrelationError when either sample is
// constant.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

// "***" below 0.001, "**" below 0.01, "*" below 0.05, otherwise empty.
std::string significance_stars(double p_value);

}  // namespace ambiprobe::eval
