#include "mtorl/io/config_json.hpp"

#include <string>

#include "io/strict_reader.hpp"

namespace mtorl::io {

using nlohmann::json;

json to_json(const data::RewardSpec& spec) {
  return json{{"mode", data::to_string(spec.mode)},
              {"fusion_weights", spec.fusion_weights},
              {"penalty_strength", spec.penalty_strength},
              {"classes", spec.classes},
              {"norm_min", spec.norm_min},
              {"norm_max", spec.norm_max},
              {"fitted", spec.fitted}};
}

data::RewardSpec reward_spec_from_json(const json& j) {
  data::RewardSpec spec;
  StrictReader r(j, "reward spec");
  std::string mode = data::to_string(spec.mode);
  r.get("mode", mode);
  spec.mode = data::reward_mode_from_string(mode);
  r.get("fusion_weights", spec.fusion_weights);
  r.get("penalty_strength", spec.penalty_strength);
  r.get("classes", spec.classes);
  r.get("norm_min", spec.norm_min);
  r.get("norm_max", spec.norm_max);
  r.get("fitted", spec.fitted);
  r.finish();
  return spec;
}

json to_json(const data::PipelineConfig& config) {
  return json{{"m", config.m},
              {"n", config.n},
              {"q_dim", config.q_dim},
              {"f_dim", config.f_dim},
              {"min_journey_len", config.min_journey_len},
              {"stride", config.stride},
              {"reward", to_json(config.reward)},
              {"split_seed", config.split_seed}};
}

data::PipelineConfig pipeline_config_from_json(const json& j) {
  data::PipelineConfig config;
  StrictReader r(j, "pipeline config");
  r.get("m", config.m);
  r.get("n", config.n);
  r.get("q_dim", config.q_dim);
  r.get("f_dim", config.f_dim);
  r.get("min_journey_len", config.min_journey_len);
  r.get("stride", config.stride);
  if (const json* v = r.find("reward")) config.reward = reward_spec_from_json(*v);
  r.get("split_seed", config.split_seed);
  r.finish();
  return config;
}

json to_json(const model::ModelConfig& config) {
  return json{{"d", config.d},
              {"F", config.F},
              {"n", config.n},
              {"m", config.m},
              {"L1", config.L1},
              {"L2", config.L2},
              {"L3", config.L3},
              {"kernel_size", config.kernel_size},
              {"dilations", config.dilations},
              {"heads", config.heads},
              {"dropout", config.dropout},
              {"leaky_slope", config.leaky_slope},
              {"ln_eps", config.ln_eps},
              {"weight_norm", config.weight_norm},
              {"per_position_bias", config.per_position_bias},
              {"reward_head", model::to_string(config.reward_head)},
              {"reward_dim", config.reward_dim},
              {"causal_state", config.causal_state},
              {"causal_attention", config.causal_attention},
              {"add_norm", config.add_norm}};
}

model::ModelConfig model_config_from_json(const json& j) {
  model::ModelConfig config;
  StrictReader r(j, "model config");
  r.get("d", config.d);
  r.get("F", config.F);
  r.get("n", config.n);
  r.get("m", config.m);
  r.get("L1", config.L1);
  r.get("L2", config.L2);
  r.get("L3", config.L3);
  r.get("kernel_size", config.kernel_size);
  r.get("dilations", config.dilations);
  r.get("heads", config.heads);
  r.get("dropout", config.dropout);
  r.get("leaky_slope", config.leaky_slope);
  r.get("ln_eps", config.ln_eps);
  r.get("weight_norm", config.weight_norm);
  r.get("per_position_bias", config.per_position_bias);
  std::string head = model::to_string(config.reward_head);
  r.get("reward_head", head);
  config.reward_head = model::reward_head_from_string(head);
  r.get("reward_dim", config.reward_dim);
  r.get("causal_state", config.causal_state);
  r.get("causal_attention", config.causal_attention);
  r.get("add_norm", config.add_norm);
  r.finish();
  return config;
}

}  // namespace mtorl::io
