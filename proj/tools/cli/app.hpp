#pragma once

#include <string>
#include <vector>

namespace ambiprobe::cli {

// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

// Parses argv and executes one subcommand.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace ambiprobe::cli
