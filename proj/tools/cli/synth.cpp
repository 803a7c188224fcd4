#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ambiprobe/error.hpp"
#include "ambiprobe/lexsub/dataset.hpp"
#include "ambiprobe/numcore/tensor.hpp"
#include "ambiprobe/util/binary_io.hpp"

namespace ambiprobe::cli {

namespace {

enum class Role { Noun, Verb, Adjective };

struct Concept {
  std::size_t domain;
  Role role;
  // Index 0 is the most frequent synonym.
  std::vector<std::string> words;
  // Preferred companion concept: object noun for a verb, modifier for a noun.
  std::size_t companion = 0;
};

struct Slot {
  std::size_t concept_id;
  std::size_t rank;
};

struct Sentence {
  std::vector<std::string> tokens;
  // Token position -> concept slot, for content words only.
  std::map<std::size_t, Slot> slots;
};

using Document = std::vector<Sentence>;

const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                               "br", "dr", "gl", "kr", "pl", "st", "tr", "sk"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
const char* const kCodas[] = {"", "", "n", "r", "l", "s", "m", "k"};
// Two letters, so never equal to a pseudo-word of two or more syllables.
const char* const kParticles[] = {"ka", "mo", "ne", "ri", "tu", "ze", "po", "li",
                                   "su", "da", "fe", "go", "vi", "bu", "ro", "te"};

class Language {
 public:
  Language(const SynthOptions& opt, Rng& rng) : opt_(opt) {
    std::set<std::string> used{"the", "a", "this", "and", "with", "in", "on", "was", "very",
                               "they", "of", "to", "it"};
    auto fresh_word = [&] {
      for (;;) {
        std::string w;
        const std::size_t syllables = 2 + rng() % 2;
        for (std::size_t s = 0; s < syllables; ++s) {
          w += kOnsets[rng() % std::size(kOnsets)];
          w += kVowels[rng() % std::size(kVowels)];
        }
        w += kCodas[rng() % std::size(kCodas)];
        if (used.insert(w).second) return w;
      }
    };
    for (std::size_t d = 0; d < opt.domains; ++d) {
      auto add = [&](Role role, std::size_t count) {
        for (std::size_t c = 0; c < count; ++c) {
          Concept k{d, role, {}, 0};
          for (std::size_t s = 0; s < opt.synonyms; ++s) k.words.push_back(fresh_word());
          by_role_[d][static_cast<int>(role)].push_back(concepts_.size());
          concepts_.push_back(std::move(k));
        }
      };
      add(Role::Noun, opt.noun_concepts);
      add(Role::Verb, opt.verb_concepts);
      add(Role::Adjective, opt.adjective_concepts);
    }
    for (auto& k : concepts_) {
      const auto& nouns = by_role_[k.domain][static_cast<int>(Role::Noun)];
      const auto& adjs = by_role_[k.domain][static_cast<int>(Role::Adjective)];
      if (k.role == Role::Verb) k.companion = nouns[rng() % nouns.size()];
      if (k.role == Role::Noun) k.companion = adjs[rng() % adjs.size()];
    }
    // Borrowed head words; a lender keeps its own word, so every shared word
    // has exactly two senses.
    std::vector<std::size_t> order(concepts_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::set<std::size_t> touched;
    const auto shared = static_cast<std::size_t>(opt.shared_fraction * concepts_.size());
    std::size_t done = 0;
    for (auto borrower : order) {
      if (done == shared) break;
      if (touched.count(borrower)) continue;
      for (std::size_t tries = 0; tries < 50; ++tries) {
        const auto lender = rng() % concepts_.size();
        if (concepts_[lender].domain == concepts_[borrower].domain || touched.count(lender)) continue;
        concepts_[borrower].words[0] = concepts_[lender].words[0];
        touched.insert(borrower);
        touched.insert(lender);
        ambiguous_.insert(concepts_[lender].words[0]);
        ++done;
        break;
      }
    }
    for (const auto& k : concepts_) {
      for (const auto& w : k.words) particle_.emplace(w, kParticles[rng() % std::size(kParticles)]);
    }
    for (std::size_t r = 0; r < opt.synonyms; ++r) rank_weights_.push_back(1.0 / std::pow(r + 1.0, 0.9));
    for (std::size_t r = 0; r < opt.domains; ++r) domain_weights_.push_back(1.0 / std::pow(r + 1.0, 0.5));
  }

  const Concept& concept_at(std::size_t id) const { return concepts_[id]; }
  bool ambiguous(const std::string& w) const { return ambiguous_.count(w) != 0; }

  Document document(Rng& rng) const {
    std::discrete_distribution<std::size_t> pick_domain(domain_weights_.begin(), domain_weights_.end());
    const std::size_t d = pick_domain(rng);
    const std::size_t n = 4 + rng() % 5;
    Document doc;
    for (std::size_t i = 0; i < n; ++i) doc.push_back(sentence(d, rng));
    return doc;
  }

 private:
  std::size_t concept_in(std::size_t d, Role role, Rng& rng) const {
    if (uniform(rng, 0.0, 1.0) < opt_.slot_noise) d = rng() % opt_.domains;
    const auto& ids = by_role_.at(d)[static_cast<int>(role)];
    return ids[rng() % ids.size()];
  }

  void emit(Sentence& s, std::size_t concept_id, Rng& rng) const {
    std::discrete_distribution<std::size_t> rank(rank_weights_.begin(), rank_weights_.end());
    const auto r = rank(rng);
    s.slots[s.tokens.size()] = Slot{concept_id, r};
    const auto& w = concepts_[concept_id].words[r];
    s.tokens.push_back(w);
    if (uniform(rng, 0.0, 1.0) < opt_.particle_rate) s.tokens.emplace_back(particle_.at(w));
  }

  // Noun optionally preceded by its companion adjective.
  void noun_phrase(Sentence& s, std::size_t noun, bool adjective, Rng& rng) const {
    if (adjective) {
      const auto adj = uniform(rng, 0.0, 1.0) < 0.7 ? concepts_[noun].companion
                                                     : concept_in(concepts_[noun].domain, Role::Adjective, rng);
      emit(s, adj, rng);
    }
    emit(s, noun, rng);
  }

  std::size_t object_of(std::size_t verb, std::size_t d, Rng& rng) const {
    return uniform(rng, 0.0, 1.0) < 0.7 ? concepts_[verb].companion : concept_in(d, Role::Noun, rng);
  }

  Sentence sentence(std::size_t d, Rng& rng) const {
    Sentence s;
    auto word = [&](const char* w) { s.tokens.emplace_back(w); };
    const auto verb = concept_in(d, Role::Verb, rng);
    switch (rng() % 5) {
      case 0:
        word("the");
        noun_phrase(s, concept_in(d, Role::Noun, rng), true, rng);
        emit(s, verb, rng);
        word("the");
        noun_phrase(s, object_of(verb, d, rng), false, rng);
        break;
      case 1:
        word("a");
        noun_phrase(s, concept_in(d, Role::Noun, rng), false, rng);
        emit(s, verb, rng);
        word("the");
        noun_phrase(s, object_of(verb, d, rng), true, rng);
        word("with");
        word("the");
        noun_phrase(s, concept_in(d, Role::Noun, rng), false, rng);
        break;
      case 2:
        word("the");
        noun_phrase(s, concept_in(d, Role::Noun, rng), false, rng);
        word("and");
        word("the");
        noun_phrase(s, concept_in(d, Role::Noun, rng), false, rng);
        emit(s, verb, rng);
        word("in");
        word("the");
        noun_phrase(s, object_of(verb, d, rng), false, rng);
        break;
      case 3: {
        word("this");
        const auto noun = concept_in(d, Role::Noun, rng);
        noun_phrase(s, noun, false, rng);
        word("was");
        word("very");
        emit(s, concepts_[noun].companion, rng);
        break;
      }
      default:
        word("they");
        emit(s, verb, rng);
        word("the");
        noun_phrase(s, object_of(verb, d, rng), true, rng);
        word("on");
        word("the");
        noun_phrase(s, concept_in(d, Role::Noun, rng), false, rng);
        break;
    }
    word(".");
    return s;
  }

  const SynthOptions& opt_;
  std::vector<Concept> concepts_;
  std::map<std::size_t, std::array<std::vector<std::size_t>, 3>> by_role_;
  std::set<std::string> ambiguous_;
  // Every word has its own particle, so synonyms differ in distribution.
  std::map<std::string, std::string> particle_;
  std::vector<double> rank_weights_;
  std::vector<double> domain_weights_;
};

std::string render(const Document& doc) {
  std::string out;
  for (const auto& s : doc) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (i > 0 && s.tokens[i] != ".") out += ' ';
      out += s.tokens[i];
    }
    out += '\n';
  }
  return out;
}

std::string corpus_text(const Language& lang, std::size_t tokens, Rng& rng) {
  std::string out;
  std::size_t count = 0;
  while (count < tokens) {
    auto doc = lang.document(rng);
    for (const auto& s : doc) count += s.tokens.size();
    if (!out.empty()) out += '\n';
    out += render(doc);
  }
  return out;
}

const char* role_tag(Role r) {
  switch (r) {
    case Role::Noun: return "n";
    case Role::Verb: return "v";
    case Role::Adjective: return "a";
  }
  return "n";
}

std::vector<lexsub::SubstitutionItem> make_items(const Language& lang, const SynthOptions& opt,
                                                 Rng& rng) {
  std::vector<double> rank_weights;
  for (std::size_t r = 0; r < opt.synonyms; ++r) rank_weights.push_back(1.0 / std::pow(r + 1.0, 0.9));
  std::vector<lexsub::SubstitutionItem> items;
  while (items.size() < opt.items) {
    const auto doc = lang.document(rng);
    const std::size_t centre = rng() % doc.size();
    const std::size_t first = centre == 0 ? 0 : centre - 1;
    const std::size_t last = std::min(doc.size() - 1, centre + 1);
    std::vector<std::string> context;
    std::size_t offset = 0;
    for (std::size_t i = first; i <= last; ++i) {
      if (i == centre) offset = context.size();
      context.insert(context.end(), doc[i].tokens.begin(), doc[i].tokens.end());
    }
    const auto& slots = doc[centre].slots;
    std::vector<std::size_t> positions, ambiguous;
    for (const auto& [pos, slot] : slots) {
      positions.push_back(pos);
      if (lang.ambiguous(doc[centre].tokens[pos])) ambiguous.push_back(pos);
    }
    // Up to two targets per context, favouring ambiguous words.
    const std::size_t targets = 1 + rng() % 2;
    std::set<std::size_t> chosen;
    for (std::size_t t = 0; t < targets; ++t) {
      const auto& pool = !ambiguous.empty() && rng() % 2 == 0 ? ambiguous : positions;
      chosen.insert(pool[rng() % pool.size()]);
    }
    for (auto pos : chosen) {
      if (items.size() == opt.items) break;
      const auto& slot = slots.at(pos);
      const auto& k = lang.concept_at(slot.concept_id);
      lexsub::SubstitutionItem it;
      it.id = "syn." + std::to_string(items.size() + 1);
      it.context = context;
      it.target_index = offset + pos;
      it.target_form = it.target_lemma = k.words[slot.rank];
      it.pos = role_tag(k.role);
      // Six annotators each propose one or two synonyms of the sense in use;
      // occasionally a related word from the same domain slips in.
      std::map<std::string, std::uint32_t> counts;
      std::vector<std::string> first_seen;
      auto propose = [&](const std::string& w) {
        if (w == it.target_lemma) return;
        if (counts[w]++ == 0) first_seen.push_back(w);
      };
      std::discrete_distribution<std::size_t> rank(rank_weights.begin(), rank_weights.end());
      for (int a = 0; a < 6; ++a) {
        const int proposals = 1 + static_cast<int>(rng() % 2);
        for (int p = 0; p < proposals; ++p) {
          if (uniform(rng, 0.0, 1.0) < 0.05) {
            const auto other = lang.concept_at((slot.concept_id + 1 + rng() % 3) %
                                               (opt.domains * (opt.noun_concepts + opt.verb_concepts +
                                                               opt.adjective_concepts)));
            propose(other.words[rank(rng)]);
          } else {
            propose(k.words[rank(rng)]);
          }
        }
      }
      const double noise = uniform(rng, 0.0, 1.0);
      if (noise < 0.1) {
        propose(k.words[1] + " " + k.words[2]);
      } else if (noise < 0.15) {
        it.target_form += "s";
        it.context[it.target_index] = it.target_form;
      } else if (noise < 0.2) {
        it.compound = true;
      }
      for (const auto& w : first_seen) it.substitutes.push_back({w, counts[w], lexsub::is_multi_word(w)});
      if (it.substitutes.empty()) continue;
      items.push_back(std::move(it));
    }
  }
  return items;
}

}  // namespace

SynthCorpus generate_synthetic(const SynthOptions& options) {
  if (options.domains == 0 || options.synonyms < 3 || options.noun_concepts == 0 ||
      options.verb_concepts == 0 || options.adjective_concepts == 0) {
    throw ConfigError("synth-data: every domain needs noun, verb and adjective concepts of 3+ synonyms");
  }
  Rng rng(derive_seed(options.seed, 1));
  Language lang(options, rng);
  SynthCorpus out;
  Rng text_rng(derive_seed(options.seed, 2));
  out.train = corpus_text(lang, options.train_tokens, text_rng);
  out.valid = corpus_text(lang, options.valid_tokens, text_rng);
  out.test = corpus_text(lang, options.test_tokens, text_rng);
  Rng item_rng(derive_seed(options.seed, 3));
  out.lexsub = lexsub::format_lexsub(make_items(lang, options, item_rng));
  return out;
}

void write_synthetic(const SynthOptions& options, const std::filesystem::path& dir) {
  const auto corpus = generate_synthetic(options);
  std::filesystem::create_directories(dir);
  util::write_file(dir / "train.txt", corpus.train);
  util::write_file(dir / "valid.txt", corpus.valid);
  util::write_file(dir / "test.txt", corpus.test);
  util::write_file(dir / "lexsub.tsv", corpus.lexsub);
}

}  // namespace ambiprobe::cli
