#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ambiprobe::util {

// Little-endian encoder into an in-memory buffer.
class BinaryWriter {
 public:
  void bytes(std::string_view data) { buffer_.append(data); }
  void u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  // u32 length followed by the raw bytes.
  void string(std::string_view s);
  void f64_array(std::span<const double> values);
  void f32_array(std::span<const float> values);

  const std::string& buffer() const noexcept { return buffer_; }
  std::string release() { return std::move(buffer_); }

 private:
  std::string buffer_;
};

// Bounds-checked little-endian decoder. Running past the end throws
// IntegrityError.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string string();
  std::vector<double> f64_array(std::size_t n);
  std::vector<float> f32_array(std::size_t n);

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  void require(std::size_t n) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never observe a
// partially written artifact.
void write_file(const std::filesystem::path& path, std::string_view contents);

// Appends a SHA-256 trailer over `payload`.
std::string seal(std::string payload);
// Verifies and strips the trailer written by seal().
std::string_view unseal(std::string_view sealed, std::string_view what);

}  // namespace ambiprobe::util
