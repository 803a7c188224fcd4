#include "app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <iostream>

#include "ambiprobe/error.hpp"
#include "log.hpp"
#include "stages.hpp"
#include "synth.hpp"

namespace ambiprobe::cli {

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("AMBIPROBE_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto seed = std::stoull(v, &used);
    if (used != std::string_view(v).size()) throw std::invalid_argument(v);
    return seed;
  } catch (const std::exception&) {
    throw ConfigError("AMBIPROBE_SEED must be an unsigned integer, got '" + std::string(v) + "'");
  }
}

int execute(const std::string& command, const std::string& config_path, const StageOptions& options) {
  const auto config = load_run_config(config_path, seed_from_env());
  check_inputs(config, command);
  if (command != "pipeline") {
    const auto outcome = run_stage(command, config, options);
    if (outcome == StageOutcome::Skipped) StageLog{command}("up to date, skipped");
    return kExitOk;
  }
  StageLog log("pipeline");
  std::size_t ran = 0, skipped = 0;
  for (const auto& stage : stage_names()) {
    if (run_stage(stage, config, options) == StageOutcome::Skipped) {
      StageLog{stage}("up to date, skipped");
      ++skipped;
    } else {
      ++ran;
    }
  }
  log(ran, " stages ran, ", skipped, " skipped");
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Probe lexical and contextual word information in BiLSTM language models",
               "ambiprobe"};
  app.require_subcommand(1);

  std::string config_path;
  StageOptions options;
  std::vector<CLI::App*> stage_commands;
  std::vector<std::string> commands = stage_names();
  commands.push_back("pipeline");
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name, name == "pipeline" ? "Run every stage in order, skipping fresh ones"
                                                            : "Run the " + name + " stage");
    sub->add_option("-c,--config", config_path, "Run configuration (INI)")->required();
    sub->add_option("-j,--jobs", options.jobs, "Parallel probe jobs")->check(CLI::PositiveNumber);
    sub->add_option("--only", options.only, "Probe name globs, e.g. 'current-*-WORD'");
    sub->add_flag("--force", options.force, "Rerun even when outputs are up to date");
    stage_commands.push_back(sub);
  }

  SynthOptions synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("synth-data", "Write a synthetic corpus and substitution set");
  gen->add_option("-o,--out", synth_out, "Output directory")->required();
  gen->add_option("--seed", synth.seed, "Generator seed");
  gen->add_option("--train-tokens", synth.train_tokens, "Approximate training tokens");
  gen->add_option("--items", synth.items, "Substitution items before filtering");

  if (argc > 1 && argv[1][0] != '-') {
    const std::string_view first = argv[1];
    if (first != "synth-data" && std::find(commands.begin(), commands.end(), first) == commands.end()) {
      std::cerr << "ambiprobe: unknown command '" << first << "'\n\n" << app.help();
      return kExitUsage;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    std::cerr << "ambiprobe: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const std::string stage_label = app.get_subcommands().front()->get_name();
  try {
    if (gen->parsed()) {
      write_synthetic(synth, synth_out);
      StageLog{"synth-data"}("wrote ", synth_out);
      return kExitOk;
    }
    return execute(stage_label, config_path, options);
  } catch (const Error& e) {
    StageLog{stage_label}("error: ", e.what());
    return e.category() == Error::Category::Data ? kExitData : kExitRuntime;
  } catch (const std::exception& e) {
    StageLog{stage_label}("error: ", e.what());
    return kExitRuntime;
  }
}

}  // namespace ambiprobe::cli
