#pragma once

#include <vector>

#include "ambiprobe/lexsub/dataset.hpp"
#include "ambiprobe/lm/vocabulary.hpp"

namespace ambiprobe::lexsub {

// Lowercased copy, matching the LM tokenizer's normalization.
std::string normalize(std::string_view token);

// Keeps items whose target form equals its lemma, that are not compound
// members, whose target is a known vocabulary word and that retain at least
// `min_subs` known single-word substitutes. Multi-word substitutes are
// removed from surviving items; unknown single-word ones are kept and
// ignored later. Idempotent.
std::vector<SubstitutionItem> filter_items(const std::vector<SubstitutionItem>& items,
                                           const lm::Vocabulary& vocab, std::size_t min_subs = 5);

// Known single-word substitute lemmas of an item, normalized, in order.
std::vector<std::string> usable_substitutes(const SubstitutionItem& item,
                                            const lm::Vocabulary& vocab);

}  // namespace ambiprobe::lexsub
