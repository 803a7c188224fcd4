#pragma once

#include <optional>
#include <vector>

#include "ambiprobe/lexsub/dataset.hpp"
#include "ambiprobe/lm/vocabulary.hpp"
#include "ambiprobe/numcore/tensor.hpp"

namespace ambiprobe::lexsub {

// Lexical and contextual target representations of one item.
struct TargetVectors {
  // Embedding of the target word.
  Vector w;
  // Mean embedding of the known substitutes.
  Vector s;
  // Mean embedding of the substitutes together with the target.
  Vector ws;
};

// Embedding table with one column per vocabulary entry. Unweighted means
// over the deduplicated known substitutes; the target joins the union only
// once if annotators also proposed it. Throws ContractError when no
// substitute is usable or the target is unknown.
TargetVectors build_targets(const SubstitutionItem& item, const lm::Vocabulary& vocab,
                            const Matrix& embeddings);

// Mean embedding of the known, non-punctuation tokens within `window`
// positions on either side of the target, excluding the target position.
// Empty when no token qualifies.
std::optional<Vector> avg_context_baseline(const SubstitutionItem& item,
                                           const lm::Vocabulary& vocab, const Matrix& embeddings,
                                           std::size_t window = 10);

// The item's context as the LM sees it: each sentence followed by a
// boundary marker, the whole preceded by one. Sentences end after ".", "!"
// or "?" tokens.
struct EncodedContext {
  std::vector<lm::TokenId> tokens;
  std::size_t target_position = 0;
};
EncodedContext encode_context(const SubstitutionItem& item, const lm::Vocabulary& vocab);

}  // namespace ambiprobe::lexsub
