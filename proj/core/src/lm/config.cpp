#include "ambiprobe/lm/config.hpp"

#include <json.hpp>

#include "ambiprobe/error.hpp"

namespace ambiprobe::lm {

void LMConfig::validate() const {
  if (embedding_dim == 0) throw ConfigError("lm: embedding_dim must be > 0");
  if (hidden_sizes.empty()) throw ConfigError("lm: at least one hidden layer is required");
  for (auto h : hidden_sizes) {
    if (h == 0) throw ConfigError("lm: hidden sizes must be > 0");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("lm: dropout must be in [0, 1)");
  if (sequence_length < 2) throw ConfigError("lm: sequence_length must be >= 2");
  if (batch_size == 0) throw ConfigError("lm: batch_size must be > 0");
  if (!(initial_lr > 0.0)) throw ConfigError("lm: learning rate must be > 0");
  if (vocab_cap == 0) throw ConfigError("lm: vocab_cap must be > 0");
  if (clip_norm < 0.0) throw ConfigError("lm: clip_norm must be >= 0");
}

LMConfig LMConfig::paper() { return LMConfig{}; }

LMConfig LMConfig::desk() {
  LMConfig c;
  c.embedding_dim = 64;
  c.hidden_sizes = {128, 128, 64};
  c.vocab_cap = 5000;
  return c;
}

std::string LMConfig::to_text() const {
  nlohmann::ordered_json j;
  j["embedding_dim"] = embedding_dim;
  j["hidden_sizes"] = hidden_sizes;
  j["dropout"] = dropout;
  j["sequence_length"] = sequence_length;
  j["batch_size"] = batch_size;
  j["initial_lr"] = initial_lr;
  j["epochs"] = epochs;
  j["vocab_cap"] = vocab_cap;
  j["clip_norm"] = clip_norm;
  j["seed"] = seed;
  return j.dump();
}

LMConfig LMConfig::from_text(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    LMConfig c;
    c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    c.hidden_sizes = j.at("hidden_sizes").get<std::vector<std::size_t>>();
    c.dropout = j.at("dropout").get<double>();
    c.sequence_length = j.at("sequence_length").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.initial_lr = j.at("initial_lr").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.vocab_cap = j.at("vocab_cap").get<std::size_t>();
    c.clip_norm = j.at("clip_norm").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("lm config: ") + e.what());
  }
}

}  // namespace ambiprobe::lm
