#include "ambiprobe/util/container.hpp"

#include "ambiprobe/error.hpp"
#include "ambiprobe/util/binary_io.hpp"

namespace ambiprobe::util {

namespace {
constexpr std::uint8_t kDtypeF64 = 1;
}

const Container::Block& Container::require(std::string_view tag) const {
  for (const auto& b : blocks) {
    if (b.tag == tag) return b;
  }
  throw IntegrityError("checkpoint: missing block '" + std::string(tag) + "'");
}

std::vector<const Container::Block*> Container::all(std::string_view tag) const {
  std::vector<const Block*> out;
  for (const auto& b : blocks) {
    if (b.tag == tag) out.push_back(&b);
  }
  return out;
}

std::string Container::serialize() const {
  BinaryWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.string(config_text);
  w.u32(static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    w.string(b.tag);
    w.u64(b.payload.size());
    w.bytes(b.payload);
  }
  return seal(w.release());
}

Container Container::parse(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic) {
    throw IntegrityError("checkpoint: bad magic (not an AMPR file)");
  }
  BinaryReader r(unseal(bytes, "checkpoint"));
  r.bytes(4);
  auto version = r.u32();
  if (version != kVersion) {
    throw IntegrityError("checkpoint: unsupported version " + std::to_string(version));
  }
  Container c;
  c.config_text = r.string();
  auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    Block b;
    b.tag = r.string();
    auto n = r.u64();
    b.payload = std::string(r.bytes(n));
    c.blocks.push_back(std::move(b));
  }
  if (!r.at_end()) throw IntegrityError("checkpoint: trailing bytes");
  return c;
}

void Container::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

Container Container::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string encode_parameter(const Parameter& p) {
  BinaryWriter w;
  w.string(p.name);
  w.u8(kDtypeF64);
  w.u32(2);
  w.u64(static_cast<std::uint64_t>(p.value.rows()));
  w.u64(static_cast<std::uint64_t>(p.value.cols()));
  w.f64_array(std::span<const double>(p.value.data(), static_cast<std::size_t>(p.value.size())));
  return w.release();
}

Parameter decode_parameter(std::string_view payload) {
  BinaryReader r(payload);
  auto name = r.string();
  if (r.u8() != kDtypeF64) throw IntegrityError("parameter '" + name + "': unsupported dtype");
  if (r.u32() != 2) throw IntegrityError("parameter '" + name + "': expected 2 dimensions");
  auto rows = r.u64();
  auto cols = r.u64();
  if (cols != 0 && rows > r.remaining() / 8 / cols) {
    throw IntegrityError("parameter '" + name + "': shape exceeds block");
  }
  auto values = r.f64_array(rows * cols);
  if (!r.at_end()) throw IntegrityError("parameter '" + name + "': trailing bytes");
  Matrix m = Eigen::Map<const Matrix>(values.data(), static_cast<Index>(rows),
                                      static_cast<Index>(cols));
  return Parameter(std::move(name), std::move(m));
}

}  // namespace ambiprobe::util
