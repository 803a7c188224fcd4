#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ambiprobe::lexsub {

struct Substitute {
  std::string lemma;
  // Number of annotators who proposed it; 1 when the source has no counts.
  std::uint32_t count = 1;
  // Contains whitespace or an underscore.
  bool multi_word = false;

  bool operator==(const Substitute&) const = default;
};

// One annotated word in context.
struct SubstitutionItem {
  std::string id;
  // Tokenized context of up to three sentences.
  std::vector<std::string> context;
  std::size_t target_index = 0;
  std::string target_form;
  std::string target_lemma;
  std::string pos;
  // Deduplicated by lemma, in order of first mention.
  std::vector<Substitute> substitutes;
  // Target is part of a compound.
  bool compound = false;

  // Context tokens joined by single spaces; items with equal context strings
  // share a context.
  std::string context_key() const;

  bool operator==(const SubstitutionItem&) const = default;
};

bool is_multi_word(std::string_view lemma);

// Parses the normalized TSV layout, one item per line:
//
//   id TAB form TAB lemma TAB pos TAB index TAB context TAB substitutes [TAB flags]
//
// `context` is space-joined tokens, `substitutes` comma-joined entries of the
// form "lemma" or "lemma:count", `flags` an optional comma-joined list in
// which "compound" marks a compound member. Blank lines and lines starting
// with '#' are skipped. Throws ParseError naming the line on malformed input
// and InputError when no item is present.
std::vector<SubstitutionItem> parse_lexsub(std::string_view text);
std::vector<SubstitutionItem> load_lexsub(const std::filesystem::path& path);

// Inverse of parse_lexsub.
std::string format_lexsub(const std::vector<SubstitutionItem>& items);

}  // namespace ambiprobe::lexsub
