#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ambiprobe/lm/tokenizer.hpp"

namespace ambiprobe::lm {

using TokenId = int;

// Bijective token <-> index map with corpus frequencies. Index 0 is the
// unknown-word token and index 1 the sequence-boundary marker; regular words
// follow in descending frequency order.
class Vocabulary {
 public:
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr std::string_view kBoundary = "<s>";
  static constexpr TokenId kUnkId = 0;
  static constexpr TokenId kBoundaryId = 1;

  Vocabulary();

  // Keeps the `cap` most frequent regular tokens (ties broken
  // lexicographically). Boundary markers in the stream count towards the
  // boundary token; dropped tokens count towards UNK. Throws InputError on
  // an empty corpus.
  static Vocabulary build(std::span<const std::string> corpus, std::size_t cap);
  static Vocabulary build(const std::vector<Sentence>& sentences, std::size_t cap);

  // Rebuilds from serialized entries; entries 0 and 1 must be the specials.
  static Vocabulary from_entries(std::vector<std::string> tokens,
                                 std::vector<std::uint64_t> frequencies);

  TokenId index(std::string_view token) const;
  bool contains(std::string_view token) const;
  // Retained regular word, i.e. neither special nor mapped to UNK.
  bool known(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::uint64_t frequency(TokenId id) const { return freqs_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return tokens_.size(); }
  static bool is_special(TokenId id) noexcept { return id == kUnkId || id == kBoundaryId; }

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  // Sentences joined into one stream, each followed by a boundary marker and
  // the whole stream preceded by one.
  std::vector<TokenId> encode_stream(const std::vector<Sentence>& sentences) const;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<std::uint64_t>& frequencies() const noexcept { return freqs_; }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> freqs_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace ambiprobe::lm
