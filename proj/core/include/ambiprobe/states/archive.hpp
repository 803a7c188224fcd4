#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "ambiprobe/states/extract.hpp"

namespace ambiprobe::states {

struct StateRecord {
  std::string item_id;
  std::uint32_t position = 0;
  // 1-based layer index.
  std::uint32_t layer = 1;
  StateKind kind = StateKind::Current;
  // Target sits at the first or last position of its sequence.
  bool at_boundary = false;
  std::vector<float> values;

  bool operator==(const StateRecord&) const = default;
};

// Records of one extraction run, keyed by (item id, kind, layer).
//
// File layout ("AMST"), little-endian:
//   "AMST" | u32 version | u32 len + fingerprint | u32 L | u32 dim * L
//   u64 record count | { u64 len + record bytes }*
//   SHA-256 of everything above
// with record bytes:
//   u32 len + item id | u32 position | u32 layer | u8 kind | u8 boundary |
//   u32 n | f32 * n
class StateArchive {
 public:
  static constexpr std::string_view kMagic = "AMST";
  static constexpr std::uint32_t kVersion = 1;

  StateArchive() = default;
  // `layer_dims[i]` is the record dimension for layer i+1.
  StateArchive(std::string fingerprint, std::vector<std::uint32_t> layer_dims);

  // Throws ContractError on a duplicate key, a layer outside the table or a
  // vector of the wrong dimension.
  void add(StateRecord record);

  const std::string& fingerprint() const noexcept { return fingerprint_; }
  const std::vector<std::uint32_t>& layer_dims() const noexcept { return layer_dims_; }
  const std::vector<StateRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  // Throws InputError when the key is absent.
  const StateRecord& at(const std::string& item_id, StateKind kind, std::uint32_t layer) const;
  const StateRecord* find(const std::string& item_id, StateKind kind, std::uint32_t layer) const;

  // Throws CompatibilityError unless the archive was produced by a model
  // with this fingerprint.
  void require_compatible(const std::string& model_fingerprint) const;

  std::string serialize() const;
  static StateArchive parse(std::string_view bytes);

 private:
  using Key = std::tuple<std::string, int, std::uint32_t>;

  std::string fingerprint_;
  std::vector<std::uint32_t> layer_dims_;
  std::vector<StateRecord> records_;
  std::map<Key, std::size_t> index_;
};

// One sequence to extract, with the position of its target word.
struct ExtractionItem {
  std::string item_id;
  std::vector<lm::TokenId> tokens;
  std::size_t position = 0;
  bool at_boundary = false;
};

// Current and predictive records for every layer of every item, in input
// order, tagged with `fingerprint`.
StateArchive extract_archive(const lm::LanguageModel& model, const std::string& fingerprint,
                             std::span<const ExtractionItem> items);

void write_archive(const std::filesystem::path& path, const StateArchive& archive);
// Throws IntegrityError on a corrupt or truncated file.
StateArchive read_archive(const std::filesystem::path& path);

}  // namespace ambiprobe::states
