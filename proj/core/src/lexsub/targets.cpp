#include "ambiprobe/lexsub/targets.hpp"

#include <algorithm>

#include "ambiprobe/error.hpp"
#include "ambiprobe/lexsub/filter.hpp"
#include "ambiprobe/lm/tokenizer.hpp"

namespace ambiprobe::lexsub {

namespace {

Vector embedding_of(const lm::Vocabulary& vocab, const Matrix& embeddings, std::string_view word) {
  return embeddings.col(vocab.index(word));
}

bool is_terminator(std::string_view t) { return t == "." || t == "!" || t == "?"; }

}  // namespace

TargetVectors build_targets(const SubstitutionItem& item, const lm::Vocabulary& vocab,
                            const Matrix& embeddings) {
  if (static_cast<std::size_t>(embeddings.cols()) != vocab.size()) {
    throw DimensionError("build_targets: embedding table has " +
                         std::to_string(embeddings.cols()) + " columns for a vocabulary of " +
                         std::to_string(vocab.size()));
  }
  const auto target = normalize(item.target_form);
  if (!vocab.known(target)) {
    throw ContractError("build_targets: target '" + target + "' of item " + item.id +
                        " is not in the vocabulary");
  }
  const auto subs = usable_substitutes(item, vocab);
  if (subs.empty()) {
    throw ContractError("build_targets: item " + item.id + " has no usable substitute");
  }
  TargetVectors out;
  out.w = embedding_of(vocab, embeddings, target);
  out.s = Vector::Zero(embeddings.rows());
  for (const auto& s : subs) out.s += embedding_of(vocab, embeddings, s);
  Vector union_sum = out.s;
  std::size_t union_count = subs.size();
  if (std::find(subs.begin(), subs.end(), target) == subs.end()) {
    union_sum += out.w;
    ++union_count;
  }
  out.s /= static_cast<double>(subs.size());
  out.ws = union_sum / static_cast<double>(union_count);
  return out;
}

std::optional<Vector> avg_context_baseline(const SubstitutionItem& item,
                                           const lm::Vocabulary& vocab, const Matrix& embeddings,
                                           std::size_t window) {
  const std::size_t t = item.target_index;
  const std::size_t lo = t >= window ? t - window : 0;
  const std::size_t hi = std::min(item.context.size(), t + window + 1);
  Vector sum = Vector::Zero(embeddings.rows());
  std::size_t n = 0;
  for (std::size_t p = lo; p < hi; ++p) {
    if (p == t) continue;
    const auto tok = normalize(item.context[p]);
    if (lm::is_punctuation(tok) || !vocab.known(tok)) continue;
    sum += embedding_of(vocab, embeddings, tok);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return Vector(sum / static_cast<double>(n));
}

EncodedContext encode_context(const SubstitutionItem& item, const lm::Vocabulary& vocab) {
  EncodedContext out;
  out.tokens.push_back(lm::Vocabulary::kBoundaryId);
  for (std::size_t p = 0; p < item.context.size(); ++p) {
    const auto tok = normalize(item.context[p]);
    if (p == item.target_index) out.target_position = out.tokens.size();
    out.tokens.push_back(vocab.index(tok));
    if (is_terminator(tok)) out.tokens.push_back(lm::Vocabulary::kBoundaryId);
  }
  if (out.tokens.back() != lm::Vocabulary::kBoundaryId) {
    out.tokens.push_back(lm::Vocabulary::kBoundaryId);
  }
  return out;
}

}  // namespace ambiprobe::lexsub
