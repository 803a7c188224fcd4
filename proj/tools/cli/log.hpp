#pragma once

#include <iostream>
#include <mutex>
#include <sstream>
#include <string_view>

namespace ambiprobe::cli {

// Writes "[stage] message" lines to standard error; safe across threads.
class StageLog {
 public:
  explicit StageLog(std::string_view stage) : stage_(stage) {}

  template <typename... Args>
  void operator()(const Args&... args) const {
    std::ostringstream line;
    line << '[' << stage_ << "] ";
    (line << ... << args);
    line << '\n';
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    std::cerr << line.str() << std::flush;
  }

 private:
  std::string_view stage_;
};

}  // namespace ambiprobe::cli
