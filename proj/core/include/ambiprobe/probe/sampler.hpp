#pragma once

#include <array>
#include <span>
#include <vector>

#include "ambiprobe/lm/vocabulary.hpp"
#include "ambiprobe/numcore/tensor.hpp"

namespace ambiprobe::probe {

// Draws negatives from the frequency quartile of a positive word. Regular
// vocabulary words are ranked by corpus frequency, descending (ties by
// index), and cut into four buckets of equal type counts; special tokens
// belong to no bucket.
class NegativeSampler {
 public:
  // Throws SamplingError when fewer than four regular words exist.
  explicit NegativeSampler(const lm::Vocabulary& vocab);
  // Frequencies indexed by token id; ids in `skip` get no bucket.
  NegativeSampler(std::span<const std::uint64_t> frequencies, std::span<const lm::TokenId> skip);

  // Bucket 0 holds the most frequent words. Throws SamplingError for a word
  // without a bucket.
  std::size_t bucket_of(lm::TokenId word) const;
  const std::vector<lm::TokenId>& bucket(std::size_t q) const { return buckets_.at(q); }

  // k distinct words from the positive's bucket, none equal to the positive
  // or listed in `excluded`. Throws SamplingError naming the bucket when
  // fewer than k candidates remain.
  std::vector<lm::TokenId> sample(lm::TokenId positive, std::span<const lm::TokenId> excluded,
                                  std::size_t k, Rng& rng) const;

 private:
  void build(std::span<const std::uint64_t> frequencies, std::span<const lm::TokenId> skip);

  std::array<std::vector<lm::TokenId>, 4> buckets_;
  // Token id -> bucket, -1 when unbucketed.
  std::vector<int> bucket_of_;
};

}  // namespace ambiprobe::probe
