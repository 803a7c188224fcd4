#include "ambiprobe/lm/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "ambiprobe/error.hpp"

namespace ambiprobe::lm {

Vocabulary::Vocabulary()
    : tokens_{std::string(kUnk), std::string(kBoundary)},
      freqs_{0, 0},
      index_{{std::string(kUnk), kUnkId}, {std::string(kBoundary), kBoundaryId}} {}

Vocabulary Vocabulary::build(std::span<const std::string> corpus, std::size_t cap) {
  if (corpus.empty()) throw InputError("build_vocabulary: empty corpus");
  std::map<std::string, std::uint64_t, std::less<>> counts;
  std::uint64_t boundaries = 0;
  std::uint64_t unk = 0;
  for (const auto& tok : corpus) {
    if (tok == kBoundary) {
      ++boundaries;
    } else if (tok == kUnk) {
      ++unk;
    } else {
      ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(), counts.end());
  // std::map iteration is already lexicographic, so a stable sort by count
  // keeps the tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (i < cap) {
      v.index_.emplace(ranked[i].first, static_cast<TokenId>(v.tokens_.size()));
      v.tokens_.push_back(ranked[i].first);
      v.freqs_.push_back(ranked[i].second);
    } else {
      unk += ranked[i].second;
    }
  }
  v.freqs_[kUnkId] = unk;
  v.freqs_[kBoundaryId] = boundaries;
  return v;
}

Vocabulary Vocabulary::build(const std::vector<Sentence>& sentences, std::size_t cap) {
  std::vector<std::string> stream;
  for (const auto& s : sentences) {
    stream.insert(stream.end(), s.begin(), s.end());
    stream.emplace_back(kBoundary);
  }
  if (sentences.empty()) throw InputError("build_vocabulary: empty corpus");
  return build(stream, cap);
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> tokens,
                                    std::vector<std::uint64_t> frequencies) {
  if (tokens.size() != frequencies.size() || tokens.size() < 2 || tokens[0] != kUnk ||
      tokens[1] != kBoundary) {
    throw IntegrityError("vocabulary: malformed entries");
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.freqs_ = std::move(frequencies);
  v.index_.clear();
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<TokenId>(i)).second) {
      throw IntegrityError("vocabulary: duplicate token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

TokenId Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

bool Vocabulary::known(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it != index_.end() && !is_special(it->second);
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index(t));
  return out;
}

std::vector<TokenId> Vocabulary::encode_stream(const std::vector<Sentence>& sentences) const {
  std::vector<TokenId> out{kBoundaryId};
  for (const auto& s : sentences) {
    for (const auto& t : s) out.push_back(index(t));
    out.push_back(kBoundaryId);
  }
  return out;
}

}  // namespace ambiprobe::lm
