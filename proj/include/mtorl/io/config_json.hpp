#pragma once

#include <nlohmann/json.hpp>

#include "mtorl/data/dataset.hpp"
#include "mtorl/model/config.hpp"

namespace mtorl::io {

// Strict converters: parsing rejects unknown keys and wrong value types
// with a ConfigError naming the offending key. Omitted keys keep struct
// defaults, so partial config files work.

nlohmann::json to_json(const data::RewardSpec& spec);
data::RewardSpec reward_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const data::PipelineConfig& config);
data::PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const model::ModelConfig& config);
model::ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace mtorl::io
