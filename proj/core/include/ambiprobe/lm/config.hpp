#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ambiprobe::lm {

struct LMConfig {
  std::size_t embedding_dim = 300;
  std::vector<std::size_t> hidden_sizes{600, 600, 300};
  double dropout = 0.2;
  std::size_t sequence_length = 100;
  std::size_t batch_size = 32;
  double initial_lr = 0.0005;
  std::size_t epochs = 20;
  std::size_t vocab_cap = 50000;
  // Global gradient-norm clip; 0 disables.
  double clip_norm = 5.0;
  std::uint64_t seed = 1;

  std::size_t num_layers() const noexcept { return hidden_sizes.size(); }
  std::size_t last_hidden() const { return hidden_sizes.back(); }

  // Throws ConfigError when a size is zero, there are no layers, or a rate
  // is out of range.
  void validate() const;

  // Values from the original large-scale setup.
  static LMConfig paper();
  // Desktop-sized profile: embedding 64, hidden 128/128/64, 5K vocabulary.
  static LMConfig desk();

  // Canonical JSON text with stable key order; round-trips exactly.
  std::string to_text() const;
  static LMConfig from_text(std::string_view text);

  bool operator==(const LMConfig&) const = default;
};

}  // namespace ambiprobe::lm
