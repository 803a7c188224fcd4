#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ambiprobe::cli {

// Shape of the generated language. Words are pseudo-words grouped into
// synonym sets ("concepts"); every domain owns noun, verb and adjective
// concepts, and a fraction of concepts borrow their most frequent word from a
// concept of another domain, which makes that word ambiguous.
struct SynthOptions {
  std::uint64_t seed = 7;
  std::size_t train_tokens = 900000;
  std::size_t valid_tokens = 50000;
  std::size_t test_tokens = 50000;
  std::size_t items = 8000;
  std::size_t domains = 16;
  std::size_t noun_concepts = 6;
  std::size_t verb_concepts = 4;
  std::size_t adjective_concepts = 3;
  std::size_t synonyms = 8;
  double shared_fraction = 0.3;
  // Probability that a slot draws its concept from a foreign domain.
  double slot_noise = 0.1;
  // Probability that a content word is followed by its particle.
  double particle_rate = 0.7;
};

struct SynthCorpus {
  // Raw text, one sentence per line, documents separated by blank lines.
  std::string train;
  std::string valid;
  std::string test;
  // Substitution items in the TSV layout read by parse_lexsub.
  std::string lexsub;
};

SynthCorpus generate_synthetic(const SynthOptions& options);

// Writes train.txt, valid.txt, test.txt and lexsub.tsv into `dir`.
void write_synthetic(const SynthOptions& options, const std::filesystem::path& dir);

}  // namespace ambiprobe::cli
