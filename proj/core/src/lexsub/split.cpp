#include "ambiprobe/lexsub/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "ambiprobe/error.hpp"
#include "ambiprobe/numcore/tensor.hpp"

namespace ambiprobe::lexsub {

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

SplitAssignment split_items(const std::vector<SubstitutionItem>& items,
                            std::array<double, 3> ratios, std::uint64_t seed) {
  double total_ratio = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw SplitError("split ratios must be non-negative");
    total_ratio += r;
  }
  if (std::abs(total_ratio - 1.0) > 1e-9) throw SplitError("split ratios must sum to 1");

  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto [it, fresh] = group_of.try_emplace(items[i].context_key(), groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  if (groups.size() < 3) {
    throw SplitError("need at least 3 distinct contexts to split, found " +
                     std::to_string(groups.size()));
  }

  Rng rng(seed);
  std::shuffle(groups.begin(), groups.end(), rng);

  const auto n = static_cast<double>(items.size());
  std::array<double, 3> filled{0.0, 0.0, 0.0};
  SplitAssignment out;
  for (const auto& g : groups) {
    std::size_t best = 0;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < 3; ++s) {
      const double deficit = ratios[s] * n - filled[s];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    filled[best] += static_cast<double>(g.size());
    for (auto i : g) {
      if (!out.emplace(items[i].id, static_cast<Split>(best)).second) {
        throw SplitError("duplicate item id '" + items[i].id + "'");
      }
    }
  }
  return out;
}

std::vector<SubstitutionItem> select(const std::vector<SubstitutionItem>& items,
                                     const SplitAssignment& assignment, Split which) {
  std::vector<SubstitutionItem> out;
  for (const auto& item : items) {
    auto it = assignment.find(item.id);
    if (it != assignment.end() && it->second == which) out.push_back(item);
  }
  return out;
}

}  // namespace ambiprobe::lexsub
