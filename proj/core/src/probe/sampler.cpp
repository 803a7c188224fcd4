#include "ambiprobe/probe/sampler.hpp"

#include <algorithm>
#include <numeric>

#include "ambiprobe/error.hpp"

namespace ambiprobe::probe {

NegativeSampler::NegativeSampler(const lm::Vocabulary& vocab) {
  const std::array<lm::TokenId, 2> specials{lm::Vocabulary::kUnkId, lm::Vocabulary::kBoundaryId};
  build(vocab.frequencies(), specials);
}

NegativeSampler::NegativeSampler(std::span<const std::uint64_t> frequencies,
                                 std::span<const lm::TokenId> skip) {
  build(frequencies, skip);
}

void NegativeSampler::build(std::span<const std::uint64_t> frequencies,
                            std::span<const lm::TokenId> skip) {
  bucket_of_.assign(frequencies.size(), -1);
  std::vector<lm::TokenId> ranked;
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    const auto id = static_cast<lm::TokenId>(i);
    if (std::find(skip.begin(), skip.end(), id) == skip.end()) ranked.push_back(id);
  }
  if (ranked.size() < buckets_.size()) {
    throw SamplingError("negative sampler: need at least 4 words to form quartiles, have " +
                        std::to_string(ranked.size()));
  }
  std::stable_sort(ranked.begin(), ranked.end(), [&](lm::TokenId a, lm::TokenId b) {
    return frequencies[static_cast<std::size_t>(a)] > frequencies[static_cast<std::size_t>(b)];
  });
  const std::size_t n = ranked.size();
  for (std::size_t q = 0; q < buckets_.size(); ++q) {
    const std::size_t lo = q * n / 4, hi = (q + 1) * n / 4;
    buckets_[q].assign(ranked.begin() + static_cast<std::ptrdiff_t>(lo),
                       ranked.begin() + static_cast<std::ptrdiff_t>(hi));
    for (auto id : buckets_[q]) bucket_of_[static_cast<std::size_t>(id)] = static_cast<int>(q);
  }
}

std::size_t NegativeSampler::bucket_of(lm::TokenId word) const {
  if (word < 0 || static_cast<std::size_t>(word) >= bucket_of_.size() ||
      bucket_of_[static_cast<std::size_t>(word)] < 0) {
    throw SamplingError("negative sampler: word " + std::to_string(word) +
                        " belongs to no frequency quartile");
  }
  return static_cast<std::size_t>(bucket_of_[static_cast<std::size_t>(word)]);
}

std::vector<lm::TokenId> NegativeSampler::sample(lm::TokenId positive,
                                                 std::span<const lm::TokenId> excluded,
                                                 std::size_t k, Rng& rng) const {
  const auto q = bucket_of(positive);
  const auto& pool = buckets_[q];
  auto banned = [&](lm::TokenId w) {
    return w == positive || std::find(excluded.begin(), excluded.end(), w) != excluded.end();
  };
  std::size_t blocked = 0;
  for (auto w : pool) blocked += banned(w) ? 1 : 0;
  const std::size_t available = pool.size() - blocked;
  if (available < k) {
    throw SamplingError("negative sampler: quartile " + std::to_string(q + 1) + " has " +
                        std::to_string(available) + " eligible words, need " + std::to_string(k));
  }
  std::vector<lm::TokenId> out;
  out.reserve(k);
  if (available >= 2 * k) {
    // Rejection sampling; terminates quickly because at least half the
    // candidates remain acceptable throughout.
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    while (out.size() < k) {
      const auto w = pool[pick(rng)];
      if (banned(w) || std::find(out.begin(), out.end(), w) != out.end()) continue;
      out.push_back(w);
    }
    return out;
  }
  std::vector<lm::TokenId> eligible;
  for (auto w : pool) {
    if (!banned(w)) eligible.push_back(w);
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
    out.push_back(eligible[i]);
  }
  return out;
}

}  // namespace ambiprobe::probe
