#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ambiprobe/lm/config.hpp"
#include "ambiprobe/probe/probe.hpp"
#include "ambiprobe/probe/trainer.hpp"

namespace ambiprobe::cli {

enum class LexsubFormat { Tsv, Coinco };
enum class ContextMode { Full, Sentence };

// Everything one pipeline run needs. Relative paths resolve against the
// directory of the config file.
struct RunConfig {
  std::string profile = "custom";
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;

  struct Corpus {
    std::filesystem::path train, valid, test;
  } corpus;

  lm::LMConfig lm;

  struct Extract {
    ContextMode context = ContextMode::Full;
  } extract;

  struct Lexsub {
    std::filesystem::path path;
    LexsubFormat format = LexsubFormat::Tsv;
    std::size_t min_subs = 5;
    std::array<double, 3> split{0.7, 0.1, 0.2};
    std::size_t baseline_window = 10;
  } lexsub;

  struct Probes {
    // Use the per-cell batch size and learning rate of the original grid;
    // otherwise `base` applies to every probe.
    bool paper_grid = true;
    probe::ProbeTrainConfig base;
    std::vector<probe::ProbeTask> tasks{probe::ProbeTask::Word, probe::ProbeTask::Sub,
                                        probe::ProbeTask::WordSub};
    std::vector<states::StateKind> kinds{states::StateKind::Current,
                                         states::StateKind::Predictive};
    std::vector<std::uint32_t> layers{1, 2, 3};
  } probes;

  struct Eval {
    std::size_t neighbors = 5;
    std::size_t overlap_k = 10;
    std::size_t showcase_items = 3;
  } eval;

  // Canonical text of every setting except the output directory, so two
  // runs that differ only in where they write hash identically.
  std::string canonical_text() const;

  // Every probe the grid asks for, in a fixed order.
  std::vector<probe::ProbeBinding> bindings() const;

  // Training configuration of one probe, seeded per binding.
  probe::ProbeTrainConfig probe_config(const probe::ProbeBinding& binding) const;
};

// Parses the INI layout documented in tools/configs/example.ini. Unknown
// sections or keys and malformed values throw ConfigError naming the key.
// `seed_override` replaces [run] seed.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir,
                           std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_run_config(const std::filesystem::path& path,
                          std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace ambiprobe::cli
