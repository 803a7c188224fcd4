#include "ambiprobe/states/archive.hpp"

#include "ambiprobe/error.hpp"
#include "ambiprobe/util/binary_io.hpp"

namespace ambiprobe::states {

StateArchive::StateArchive(std::string fingerprint, std::vector<std::uint32_t> layer_dims)
    : fingerprint_(std::move(fingerprint)), layer_dims_(std::move(layer_dims)) {}

void StateArchive::add(StateRecord record) {
  if (record.layer < 1 || record.layer > layer_dims_.size()) {
    throw ContractError("state archive: layer " + std::to_string(record.layer) +
                        " outside 1.." + std::to_string(layer_dims_.size()));
  }
  if (record.values.size() != layer_dims_[record.layer - 1]) {
    throw ContractError("state archive: record for '" + record.item_id + "' layer " +
                        std::to_string(record.layer) + " has " +
                        std::to_string(record.values.size()) + " entries, expected " +
                        std::to_string(layer_dims_[record.layer - 1]));
  }
  Key key{record.item_id, static_cast<int>(record.kind), record.layer};
  if (index_.contains(key)) {
    throw ContractError("state archive: duplicate record for '" + record.item_id + "' " +
                        to_string(record.kind) + " layer " + std::to_string(record.layer));
  }
  index_.emplace(std::move(key), records_.size());
  records_.push_back(std::move(record));
}

const StateRecord* StateArchive::find(const std::string& item_id, StateKind kind,
                                      std::uint32_t layer) const {
  auto it = index_.find(Key{item_id, static_cast<int>(kind), layer});
  return it == index_.end() ? nullptr : &records_[it->second];
}

const StateRecord& StateArchive::at(const std::string& item_id, StateKind kind,
                                    std::uint32_t layer) const {
  if (const auto* r = find(item_id, kind, layer)) return *r;
  throw InputError("state archive: no " + std::string(to_string(kind)) + " layer " +
                   std::to_string(layer) + " record for item '" + item_id + "'");
}

void StateArchive::require_compatible(const std::string& model_fingerprint) const {
  if (model_fingerprint != fingerprint_) {
    throw CompatibilityError("state archive was produced by checkpoint " + fingerprint_ +
                             " but is used with checkpoint " + model_fingerprint);
  }
}

std::string StateArchive::serialize() const {
  util::BinaryWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.string(fingerprint_);
  w.u32(static_cast<std::uint32_t>(layer_dims_.size()));
  for (auto d : layer_dims_) w.u32(d);
  w.u64(records_.size());
  for (const auto& r : records_) {
    util::BinaryWriter rw;
    rw.string(r.item_id);
    rw.u32(r.position);
    rw.u32(r.layer);
    rw.u8(static_cast<std::uint8_t>(r.kind));
    rw.u8(r.at_boundary ? 1 : 0);
    rw.u32(static_cast<std::uint32_t>(r.values.size()));
    rw.f32_array(r.values);
    w.u64(rw.buffer().size());
    w.bytes(rw.buffer());
  }
  return util::seal(w.release());
}

StateArchive StateArchive::parse(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic) {
    throw IntegrityError("state archive: bad magic (not an AMST file)");
  }
  util::BinaryReader r(util::unseal(bytes, "state archive"));
  r.bytes(4);
  if (auto v = r.u32(); v != kVersion) {
    throw IntegrityError("state archive: unsupported version " + std::to_string(v));
  }
  auto fp = r.string();
  auto layers = r.u32();
  if (layers > r.remaining() / 4) throw IntegrityError("state archive: truncated layer table");
  std::vector<std::uint32_t> dims(layers);
  for (auto& d : dims) d = r.u32();
  StateArchive archive(std::move(fp), std::move(dims));
  const auto count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    util::BinaryReader rr(r.bytes(r.u64()));
    StateRecord rec;
    rec.item_id = rr.string();
    rec.position = rr.u32();
    rec.layer = rr.u32();
    const auto kind = rr.u8();
    if (kind > 1) throw IntegrityError("state archive: bad kind byte in record " + std::to_string(i));
    rec.kind = static_cast<StateKind>(kind);
    rec.at_boundary = rr.u8() != 0;
    rec.values = rr.f32_array(rr.u32());
    if (!rr.at_end()) throw IntegrityError("state archive: trailing bytes in record " + std::to_string(i));
    try {
      archive.add(std::move(rec));
    } catch (const ContractError& e) {
      throw IntegrityError(std::string("state archive: ") + e.what());
    }
  }
  if (!r.at_end()) throw IntegrityError("state archive: trailing bytes");
  return archive;
}

StateArchive extract_archive(const lm::LanguageModel& model, const std::string& fingerprint,
                             std::span<const ExtractionItem> items) {
  std::vector<std::uint32_t> dims;
  for (auto h : model.config().hidden_sizes) dims.push_back(static_cast<std::uint32_t>(2 * h));
  StateArchive archive(fingerprint, dims);
  for (const auto& item : items) {
    if (item.position >= item.tokens.size()) {
      throw InputError("extraction: target position " + std::to_string(item.position) +
                       " outside item '" + item.item_id + "'");
    }
    const auto seq = model.forward(item.tokens, false);
    for (auto kind : {StateKind::Current, StateKind::Predictive}) {
      const auto vectors = kind == StateKind::Current ? current_states(seq, item.position)
                                                      : predictive_states(seq, item.position);
      for (std::size_t l = 0; l < vectors.size(); ++l) {
        StateRecord rec;
        rec.item_id = item.item_id;
        rec.position = static_cast<std::uint32_t>(item.position);
        rec.layer = static_cast<std::uint32_t>(l + 1);
        rec.kind = kind;
        rec.at_boundary = item.at_boundary;
        rec.values.resize(static_cast<std::size_t>(vectors[l].size()));
        for (Index i = 0; i < vectors[l].size(); ++i) {
          rec.values[static_cast<std::size_t>(i)] = static_cast<float>(vectors[l](i));
        }
        archive.add(std::move(rec));
      }
    }
  }
  return archive;
}

void write_archive(const std::filesystem::path& path, const StateArchive& archive) {
  util::write_file(path, archive.serialize());
}

StateArchive read_archive(const std::filesystem::path& path) {
  return StateArchive::parse(util::read_file(path));
}

}  // namespace ambiprobe::states
