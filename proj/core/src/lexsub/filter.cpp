#include "ambiprobe/lexsub/filter.hpp"

#include <algorithm>

namespace ambiprobe::lexsub {

std::string normalize(std::string_view token) {
  std::string out(token);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  });
  return out;
}

std::vector<std::string> usable_substitutes(const SubstitutionItem& item,
                                            const lm::Vocabulary& vocab) {
  std::vector<std::string> out;
  for (const auto& s : item.substitutes) {
    if (s.multi_word) continue;
    auto lemma = normalize(s.lemma);
    if (!vocab.known(lemma)) continue;
    if (std::find(out.begin(), out.end(), lemma) == out.end()) out.push_back(std::move(lemma));
  }
  return out;
}

std::vector<SubstitutionItem> filter_items(const std::vector<SubstitutionItem>& items,
                                           const lm::Vocabulary& vocab, std::size_t min_subs) {
  std::vector<SubstitutionItem> out;
  for (const auto& item : items) {
    const auto form = normalize(item.target_form);
    if (form != normalize(item.target_lemma)) continue;
    if (item.compound) continue;
    if (!vocab.known(form)) continue;
    if (usable_substitutes(item, vocab).size() < min_subs) continue;
    SubstitutionItem kept = item;
    std::erase_if(kept.substitutes, [](const Substitute& s) { return s.multi_word; });
    out.push_back(std::move(kept));
  }
  return out;
}

}  // namespace ambiprobe::lexsub
