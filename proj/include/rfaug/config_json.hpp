// rfaug/config_json.hpp
//
// JSON views of the configuration records. `apply` overlays the keys that
// are present onto an existing record, so a partial file only overrides what
// it names. Unknown keys and wrongly typed values throw ConfigError.
#pragma once

#include "rfaug/fingerprint_sim.hpp"
#include "rfaug/sweep.hpp"

#include <json.hpp>

namespace rfaug::config {

nlohmann::json to_json(const nn::TrainConfig& c);
nlohmann::json to_json(const gen::GenConfig& c);
nlohmann::json to_json(const latent::OptConfig& c);
nlohmann::json to_json(const openset::OvAConfig& c);
nlohmann::json to_json(const sim::CorpusConfig& c);
nlohmann::json to_json(const sweep::SupervisedConfig& c);
nlohmann::json to_json(const sweep::BlindConfig& c);

void apply(const nlohmann::json& j, nn::TrainConfig& c);
void apply(const nlohmann::json& j, gen::GenConfig& c);
void apply(const nlohmann::json& j, latent::OptConfig& c);
void apply(const nlohmann::json& j, openset::OvAConfig& c);
void apply(const nlohmann::json& j, sim::CorpusConfig& c);
void apply(const nlohmann::json& j, sweep::SupervisedConfig& c);
void apply(const nlohmann::json& j, sweep::BlindConfig& c);

} // namespace rfaug::config
