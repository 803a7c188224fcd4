#include "ambiprobe/probe/checkpoint.hpp"

#include <json.hpp>

#include "ambiprobe/error.hpp"
#include "ambiprobe/util/binary_io.hpp"
#include "ambiprobe/util/container.hpp"

namespace ambiprobe::probe {

std::string ProbeCheckpoint::serialize() const {
  util::Container c;
  c.config_text = config.to_text();
  nlohmann::ordered_json meta;
  const auto& b = model.binding();
  meta["task"] = to_string(b.task);
  meta["kind"] = states::to_string(b.kind);
  meta["layer"] = b.layer;
  meta["input_dim"] = model.input_dim();
  meta["output_dim"] = model.output_dim();
  meta["best_epoch"] = best_epoch;
  meta["lm_fingerprint"] = lm_fingerprint;
  c.add("probe", meta.dump());
  c.add("param", util::encode_parameter(model.weight()));
  c.add("param", util::encode_parameter(model.bias()));
  return c.serialize();
}

void ProbeCheckpoint::save(const std::filesystem::path& path) const {
  util::write_file(path, serialize());
}

ProbeCheckpoint ProbeCheckpoint::parse(std::string_view bytes) {
  auto c = util::Container::parse(bytes);
  try {
    auto meta = nlohmann::json::parse(c.require("probe").payload);
    ProbeBinding binding{parse_task(meta.at("task").get<std::string>()),
                         states::parse_state_kind(meta.at("kind").get<std::string>()),
                         meta.at("layer").get<std::uint32_t>()};
    auto params = c.all("param");
    if (params.size() != 2) throw IntegrityError("probe checkpoint: expected 2 parameters");
    auto w = util::decode_parameter(params[0]->payload);
    auto b = util::decode_parameter(params[1]->payload);
    ProbeModel model(binding, std::move(w), std::move(b));
    if (model.input_dim() != meta.at("input_dim").get<std::size_t>() ||
        model.output_dim() != meta.at("output_dim").get<std::size_t>()) {
      throw IntegrityError("probe checkpoint: parameter shapes disagree with metadata");
    }
    return ProbeCheckpoint{std::move(model), ProbeTrainConfig::from_text(c.config_text),
                           meta.at("lm_fingerprint").get<std::string>(),
                           meta.at("best_epoch").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("probe checkpoint: bad metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("probe checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw IntegrityError(std::string("probe checkpoint: ") + e.what());
  }
}

ProbeCheckpoint ProbeCheckpoint::load(const std::filesystem::path& path) {
  return parse(util::read_file(path));
}

}  // namespace ambiprobe::probe
