#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ambiprobe/numcore/adam.hpp"

namespace ambiprobe::util {

// Versioned binary container shared by LM and probe checkpoints:
//
//   "AMPR" | u32 version | u32 len + config text (UTF-8)
//   u32 block count | { u32 len + tag | u64 len + payload }*
//   SHA-256 of everything above
//
// Integers and floats are little-endian.
struct Container {
  static constexpr std::string_view kMagic = "AMPR";
  static constexpr std::uint32_t kVersion = 1;

  struct Block {
    std::string tag;
    std::string payload;
  };

  std::string config_text;
  std::vector<Block> blocks;

  void add(std::string tag, std::string payload) {
    blocks.push_back({std::move(tag), std::move(payload)});
  }
  // First block with the tag; throws IntegrityError when absent.
  const Block& require(std::string_view tag) const;
  std::vector<const Block*> all(std::string_view tag) const;

  std::string serialize() const;
  static Container parse(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static Container load(const std::filesystem::path& path);
};

// Parameter block payload: u32 len + name | u8 dtype (1 = f64) | u32 ndim |
// u64 dims... | values in column-major order.
std::string encode_parameter(const Parameter& p);
Parameter decode_parameter(std::string_view payload);

}  // namespace ambiprobe::util
