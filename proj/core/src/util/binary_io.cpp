#include "ambiprobe/util/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ambiprobe/error.hpp"
#include "ambiprobe/util/sha256.hpp"

namespace ambiprobe::util {

namespace {

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

}  // namespace

void BinaryWriter::u32(std::uint32_t v) { put_le(buffer_, v); }
void BinaryWriter::u64(std::uint64_t v) { put_le(buffer_, v); }
void BinaryWriter::f32(float v) { put_le(buffer_, std::bit_cast<std::uint32_t>(v)); }
void BinaryWriter::f64(double v) { put_le(buffer_, std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::string(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s);
}

void BinaryWriter::f64_array(std::span<const double> values) {
  buffer_.reserve(buffer_.size() + values.size() * 8);
  for (double v : values) f64(v);
}

void BinaryWriter::f32_array(std::span<const float> values) {
  buffer_.reserve(buffer_.size() + values.size() * 4);
  for (float v : values) f32(v);
}

void BinaryReader::require(std::size_t n) const {
  if (n > remaining()) {
    throw IntegrityError("truncated data: need " + std::to_string(n) + " bytes at offset " +
                         std::to_string(pos_) + ", " + std::to_string(remaining()) + " left");
  }
}

std::string_view BinaryReader::bytes(std::size_t n) {
  require(n);
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t BinaryReader::u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
std::uint32_t BinaryReader::u32() { return get_le<std::uint32_t>(bytes(4).data()); }
std::uint64_t BinaryReader::u64() { return get_le<std::uint64_t>(bytes(8).data()); }
float BinaryReader::f32() { return std::bit_cast<float>(u32()); }
double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::string() {
  auto n = u32();
  return std::string(bytes(n));
}

std::vector<double> BinaryReader::f64_array(std::size_t n) {
  if (n > remaining() / 8) require(n * 8);
  std::vector<double> out(n);
  for (auto& v : out) v = f64();
  return out;
}

std::vector<float> BinaryReader::f32_array(std::size_t n) {
  if (n > remaining() / 4) require(n * 4);
  std::vector<float> out(n);
  for (auto& v : out) v = f32();
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string seal(std::string payload) {
  auto digest = sha256(payload);
  payload.append(reinterpret_cast<const char*>(digest.data()), digest.size());
  return payload;
}

std::string_view unseal(std::string_view sealed, std::string_view what) {
  if (sealed.size() < 32) throw IntegrityError(std::string(what) + ": file too short");
  auto payload = sealed.substr(0, sealed.size() - 32);
  auto digest = sha256(payload);
  if (std::memcmp(digest.data(), sealed.data() + payload.size(), 32) != 0) {
    throw IntegrityError(std::string(what) + ": checksum mismatch (corrupt or truncated)");
  }
  return payload;
}

}  // namespace ambiprobe::util
