#pragma once

#include <filesystem>
#include <string>

#include "ambiprobe/lm/model.hpp"
#include "ambiprobe/lm/trainer.hpp"
#include "ambiprobe/lm/vocabulary.hpp"

namespace ambiprobe::lm {

// Everything needed to reproduce a trained language model. Stored in the
// AMPR container with blocks "vocab", "meta" and one "param" per parameter.
struct Checkpoint {
  Vocabulary vocab;
  LanguageModel model;
  TrainingMetadata metadata;

  void save(const std::filesystem::path& path) const;
  std::string serialize() const;
  // Throws IntegrityError on corruption or a parameter that does not fit the
  // stored configuration.
  static Checkpoint load(const std::filesystem::path& path);
  static Checkpoint parse(std::string_view bytes);
};

// Hex SHA-256 over the encoded parameter blocks, in storage order. Identifies
// a model independently of its metadata.
std::string fingerprint(const LanguageModel& model);

}  // namespace ambiprobe::lm
