#pragma once

#include <span>
#include <string>
#include <vector>

#include "ambiprobe/lm/vocabulary.hpp"
#include "ambiprobe/numcore/tensor.hpp"

namespace ambiprobe::eval {

struct Neighbor {
  lm::TokenId id;
  std::string word;
  double cosine;
};

struct NeighborReport {
  std::string query;
  // Descending cosine; equal cosines ordered by vocabulary index.
  std::vector<Neighbor> neighbors;
};

// The k columns of `embeddings` closest to `query` by cosine, skipping
// `exclusions`. Words are filled in when `vocab` is given. Throws
// ContractError when k is zero or exceeds the candidates and
// UndefinedSimilarityError on a zero-norm query or column.
NeighborReport nearest_neighbors(const Vector& query, const Matrix& embeddings, std::size_t k,
                                 std::span<const lm::TokenId> exclusions,
                                 const lm::Vocabulary* vocab = nullptr);

// |topk(a) & topk(b)| / k.
double neighbor_overlap(const Vector& a, const Vector& b, const Matrix& embeddings,
                        std::size_t k, std::span<const lm::TokenId> exclusions);

}  // namespace ambiprobe::eval
