#pragma once

#include <filesystem>
#include <string>

#include "ambiprobe/probe/trainer.hpp"

namespace ambiprobe::probe {

// Trained probe with its provenance. Stored in the AMPR container: the
// training configuration as config text, a "probe" metadata block and the
// weight and bias as "param" blocks.
struct ProbeCheckpoint {
  ProbeModel model;
  ProbeTrainConfig config;
  // Fingerprint of the language model whose states the probe reads.
  std::string lm_fingerprint;
  std::size_t best_epoch = 0;

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;
  static ProbeCheckpoint parse(std::string_view bytes);
  static ProbeCheckpoint load(const std::filesystem::path& path);
};

}  // namespace ambiprobe::probe
