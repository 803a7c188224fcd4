#include "ambiprobe/eval/neighbors.hpp"

#include <algorithm>

#include "ambiprobe/error.hpp"
#include "ambiprobe/numcore/functional.hpp"

namespace ambiprobe::eval {

NeighborReport nearest_neighbors(const Vector& query, const Matrix& embeddings, std::size_t k,
                                 std::span<const lm::TokenId> exclusions,
                                 const lm::Vocabulary* vocab) {
  const auto v = static_cast<std::size_t>(embeddings.cols());
  std::vector<bool> skip(v, false);
  std::size_t skipped = 0;
  for (auto id : exclusions) {
    if (id >= 0 && static_cast<std::size_t>(id) < v && !skip[static_cast<std::size_t>(id)]) {
      skip[static_cast<std::size_t>(id)] = true;
      ++skipped;
    }
  }
  if (k == 0 || k > v - skipped) {
    throw ContractError("nearest_neighbors: k = " + std::to_string(k) + " with " +
                        std::to_string(v - skipped) + " candidates");
  }
  std::vector<Neighbor> all;
  all.reserve(v - skipped);
  for (std::size_t j = 0; j < v; ++j) {
    if (skip[j]) continue;
    all.push_back({static_cast<lm::TokenId>(j), {}, fn::cosine(query, embeddings.col(static_cast<Index>(j)))});
  }
  auto before = [](const Neighbor& a, const Neighbor& b) {
    return a.cosine != b.cosine ? a.cosine > b.cosine : a.id < b.id;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), before);
  all.resize(k);
  if (vocab != nullptr) {
    for (auto& n : all) n.word = vocab->token(n.id);
  }
  return NeighborReport{{}, std::move(all)};
}

double neighbor_overlap(const Vector& a, const Vector& b, const Matrix& embeddings,
                        std::size_t k, std::span<const lm::TokenId> exclusions) {
  auto na = nearest_neighbors(a, embeddings, k, exclusions).neighbors;
  auto nb = nearest_neighbors(b, embeddings, k, exclusions).neighbors;
  std::size_t shared = 0;
  for (const auto& x : na) {
    for (const auto& y : nb) shared += x.id == y.id ? 1 : 0;
  }
  return static_cast<double>(shared) / static_cast<double>(k);
}

}  // namespace ambiprobe::eval
