#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace ambiprobe::cli {

// Artifact locations under the output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path corpus(const char* split) const {
    return root / "corpus" / (std::string(split) + ".tok");
  }
  std::filesystem::path lm_checkpoint() const { return root / "lm" / "model.ampr"; }
  std::filesystem::path lm_curve() const { return root / "lm" / "training.csv"; }
  std::filesystem::path perplexity() const { return root / "lm" / "perplexity.json"; }
  std::filesystem::path items() const { return root / "lexsub" / "items.tsv"; }
  std::filesystem::path splits() const { return root / "lexsub" / "splits.tsv"; }
  std::filesystem::path filter_report() const { return root / "lexsub" / "filter.json"; }
  std::filesystem::path states() const { return root / "states" / "states.amst"; }
  std::filesystem::path probe_checkpoint(const std::string& name) const {
    return root / "probes" / (name + ".ampr");
  }
  std::filesystem::path probe_curve(const std::string& name) const {
    return root / "probes" / (name + ".csv");
  }
  std::filesystem::path results() const { return root / "eval" / "results.json"; }
  std::filesystem::path summary() const { return root / "eval" / "summary.txt"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
};

struct StageOptions {
  std::size_t jobs = 1;
  // Glob patterns over probe names such as "current-1-WORD"; empty = all.
  std::vector<std::string> only;
  // Rerun even when the freshness stamp matches.
  bool force = false;
};

enum class StageOutcome { Ran, Skipped };

// Stage names in pipeline order.
const std::vector<std::string>& stage_names();

// Throws ConfigError naming the first missing input a stage reads from
// outside the output directory.
void check_inputs(const RunConfig& config, const std::string& stage);

StageOutcome run_stage(const std::string& stage, const RunConfig& config,
                       const StageOptions& options);

}  // namespace ambiprobe::cli
