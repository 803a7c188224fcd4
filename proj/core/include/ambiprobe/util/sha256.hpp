#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace ambiprobe::util {

using Digest = std::array<std::uint8_t, 32>;

// Incremental SHA-256 (OpenSSL EVP backed).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view data);
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(std::string_view data);
std::string to_hex(const Digest& digest);
std::string sha256_hex(std::string_view data);

}  // namespace ambiprobe::util
