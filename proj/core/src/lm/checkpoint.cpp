#include "ambiprobe/lm/checkpoint.hpp"

#include <json.hpp>

#include "ambiprobe/error.hpp"
#include "ambiprobe/util/binary_io.hpp"
#include "ambiprobe/util/container.hpp"
#include "ambiprobe/util/sha256.hpp"

namespace ambiprobe::lm {

namespace {

std::string encode_vocab(const Vocabulary& vocab) {
  util::BinaryWriter w;
  w.u64(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    w.string(vocab.tokens()[i]);
    w.u64(vocab.frequencies()[i]);
  }
  return w.release();
}

Vocabulary decode_vocab(std::string_view payload) {
  util::BinaryReader r(payload);
  const auto n = r.u64();
  if (n > r.remaining()) throw IntegrityError("checkpoint: vocabulary size exceeds block");
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> freqs;
  tokens.reserve(n);
  freqs.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    tokens.push_back(r.string());
    freqs.push_back(r.u64());
  }
  if (!r.at_end()) throw IntegrityError("checkpoint: trailing bytes in vocabulary block");
  return Vocabulary::from_entries(std::move(tokens), std::move(freqs));
}

std::string encode_meta(const TrainingMetadata& m) {
  nlohmann::ordered_json j;
  j["epochs_run"] = m.epochs_run;
  j["best_epoch"] = m.best_epoch;
  j["train_loss"] = m.train_loss;
  j["valid_perplexity"] = m.valid_perplexity;
  j["learning_rate"] = m.learning_rate;
  j["rng_state"] = m.rng_state;
  return j.dump();
}

TrainingMetadata decode_meta(std::string_view payload) {
  try {
    auto j = nlohmann::json::parse(payload);
    TrainingMetadata m;
    m.epochs_run = j.at("epochs_run").get<std::size_t>();
    m.best_epoch = j.at("best_epoch").get<std::size_t>();
    m.train_loss = j.at("train_loss").get<std::vector<double>>();
    m.valid_perplexity = j.at("valid_perplexity").get<std::vector<double>>();
    m.learning_rate = j.at("learning_rate").get<std::vector<double>>();
    m.rng_state = j.at("rng_state").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("checkpoint: bad metadata block: ") + e.what());
  }
}

}  // namespace

std::string Checkpoint::serialize() const {
  util::Container c;
  c.config_text = model.config().to_text();
  c.add("vocab", encode_vocab(vocab));
  c.add("meta", encode_meta(metadata));
  for (const auto& p : model.parameters()) c.add("param", util::encode_parameter(p));
  return c.serialize();
}

void Checkpoint::save(const std::filesystem::path& path) const {
  util::write_file(path, serialize());
}

Checkpoint Checkpoint::parse(std::string_view bytes) {
  auto c = util::Container::parse(bytes);
  LMConfig config;
  try {
    config = LMConfig::from_text(c.config_text);
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("checkpoint: bad config: ") + e.what());
  }
  auto vocab = decode_vocab(c.require("vocab").payload);
  auto meta = decode_meta(c.require("meta").payload);
  std::vector<Parameter> params;
  for (const auto* b : c.all("param")) params.push_back(util::decode_parameter(b->payload));
  LanguageModel model(std::move(config), vocab.size(), std::move(params));
  return Checkpoint{std::move(vocab), std::move(model), std::move(meta)};
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  return parse(util::read_file(path));
}

std::string fingerprint(const LanguageModel& model) {
  util::Sha256 h;
  for (const auto& p : model.parameters()) h.update(util::encode_parameter(p));
  return util::to_hex(h.finish());
}

}  // namespace ambiprobe::lm
