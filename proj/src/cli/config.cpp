#include "mtorl/cli/config.hpp"

#include <fstream>
#include <vector>

#include "io/strict_reader.hpp"
#include "mtorl/common/errors.hpp"

namespace mtorl::cli {

using io::StrictReader;
using nlohmann::json;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("failed to parse config file '" + path + "': " + e.what());
  }
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    segments.push_back(path.substr(start, dot - start));
    if (segments.back().empty()) {
      throw ConfigError("override path '" + path + "' has an empty segment");
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }

  json* cursor = &config;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    json& next = (*cursor)[segments[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) {
      throw ConfigError("override path '" + path + "' crosses a non-object value at '" +
                        segments[i] + "'");
    }
    cursor = &next;
  }

  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // bare words and paths stay strings
  (*cursor)[segments.back()] = std::move(value);
}

void check_top_level(const json& config) {
  if (!config.is_object()) throw ConfigError("config root must be a JSON object");
  static const char* kSections[] = {"seed",        "out",      "data",      "pipeline",
                                    "model",       "training", "environment", "generate",
                                    "procedure",   "allocate", "evaluate"};
  for (const auto& [key, value] : config.items()) {
    bool known = false;
    for (const char* s : kSections) {
      if (key == s) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown top-level section '" + key + "'");
  }
}

DataPaths data_paths_from_json(const json& j) {
  DataPaths paths;
  StrictReader r(j, "data section");
  r.get("journeys", paths.journeys);
  r.get("profiles", paths.profiles);
  r.get("predictions", paths.predictions);
  r.get("checkpoint", paths.checkpoint);
  r.finish();
  return paths;
}

train::TrainConfig train_config_from_json(const json& j) {
  train::TrainConfig config;
  StrictReader r(j, "training config");
  r.get("lr", config.lr);
  r.get("batch_size", config.batch_size);
  r.get("max_epochs", config.max_epochs);
  r.get("patience", config.patience);
  r.get("mu", config.weights.mu);
  r.get("lambda", config.weights.lambda);
  r.get("beta", config.weights.beta);
  r.get("adam_beta1", config.adam_beta1);
  r.get("adam_beta2", config.adam_beta2);
  r.get("adam_eps", config.adam_eps);
  r.get("micro_metrics", config.micro_metrics);
  r.finish();
  return config;
}

sim::EnvironmentConfig environment_config_from_json(const json& j, std::uint64_t seed) {
  sim::EnvironmentConfig config;
  config.users = 20;
  config.m = 3;
  config.seed = seed;

  StrictReader r(j, "environment config");
  r.get("users", config.users);
  r.get("m", config.m);
  if (config.users < 1 || config.m < 1) {
    throw ConfigError("environment needs at least one user and one channel");
  }

  const bool shorthand = j.contains("dominant_prob") || j.contains("other_prob");
  double dominant = 0.8;
  double rest = 0.1;
  r.get("dominant_prob", dominant);
  r.get("other_prob", rest);
  r.get("base_probs", config.base_probs);
  if (!config.base_probs.empty() && shorthand) {
    throw ConfigError("base_probs conflicts with dominant_prob/other_prob in environment config");
  }
  if (config.base_probs.empty()) {
    config.base_probs = sim::separable_probs(config.users, config.m, dominant, rest);
  }

  double cost = 1.0;
  r.get("cost", cost);
  r.get("costs", config.costs);
  if (!config.costs.empty() && j.contains("cost")) {
    throw ConfigError("costs conflicts with the scalar cost in environment config");
  }
  if (config.costs.empty()) config.costs.assign(static_cast<std::size_t>(config.m), cost);

  r.get("gain_value", config.gain_value);
  r.get("drift", config.drift);
  r.get("q_dim", config.q_dim);
  r.get("profile_noise", config.profile_noise);
  r.finish();
  config.validate();
  return config;
}

sim::LogGenConfig log_gen_config_from_json(const json& j) {
  sim::LogGenConfig config;
  StrictReader r(j, "generate config");
  r.get("observations_per_user", config.observations_per_user);
  r.get("greedy", config.greedy);
  r.finish();
  config.validate();
  return config;
}

SimulateSettings simulate_settings_from_json(const json& j, int m) {
  SimulateSettings settings;
  StrictReader r(j, "procedure config");
  r.get("budget", settings.procedure.budget);
  r.get("max_exposures", settings.procedure.max_exposures);
  r.get("top_n", settings.procedure.top_n);
  r.get("eta", settings.procedure.eta);
  r.get("exploration_rounds", settings.procedure.exploration_rounds);
  r.get("stochastic", settings.procedure.stochastic);
  settings.penalty_set = j.contains("penalty_strength");
  r.get("penalty_strength", settings.procedure.penalty_strength);
  std::vector<double> initial;
  r.get("initial_policy", initial);
  r.get("policy", settings.policy);
  r.get("memory_window", settings.memory_window);
  r.get("mean_score", settings.mean_score);
  r.finish();

  if (settings.policy != "model" && settings.policy != "random" && settings.policy != "greedy") {
    throw ConfigError("key 'policy' in procedure config must be one of model, random, greedy");
  }
  if (settings.memory_window < 1) {
    throw ConfigError("key 'memory_window' in procedure config must be at least 1");
  }
  if (initial.empty()) {
    settings.procedure.initial_policy.probs.assign(static_cast<std::size_t>(m), 1.0 / m);
  } else {
    settings.procedure.initial_policy.probs = std::move(initial);
  }
  settings.procedure.validate(m);
  return settings;
}

AllocateSettings allocate_settings_from_json(const json& j) {
  AllocateSettings settings;
  StrictReader r(j, "allocate config");
  r.get("tau", settings.tau);
  r.get("alpha", settings.alpha);
  r.get("top_n", settings.top_n);
  r.get("m", settings.m);
  r.finish();
  return settings;
}

EvaluateSettings evaluate_settings_from_json(const json& j) {
  EvaluateSettings settings;
  StrictReader r(j, "evaluate config");
  r.get("split", settings.split);
  r.get("micro", settings.micro);
  r.finish();
  if (settings.split != "all" && settings.split != "train" && settings.split != "validation" &&
      settings.split != "test") {
    throw ConfigError("key 'split' in evaluate config must be one of all, train, validation, test");
  }
  return settings;
}

json to_json(const train::EvalReport& report) {
  return json{{"f1", report.f1},
              {"precision", report.precision},
              {"recall", report.recall},
              {"reward_metric", report.reward_metric},
              {"valid_steps", report.valid_steps},
              {"channels_missing", report.channels_missing}};
}

json to_json(const alloc::ChannelPolicy& policy) { return json(policy.probs); }

json to_json(const alloc::UserRanking& ranking) {
  json out = json::array();
  for (const auto& entry : ranking) {
    out.push_back(json{{"user", entry.user_id}, {"score", entry.score}});
  }
  return out;
}

json to_json(const sim::RunReport& report) {
  return json{{"cum_penalized", report.cum_penalized},
              {"cum_gain", report.cum_gain},
              {"cum_cost", report.cum_cost},
              {"exposures", report.exposures},
              {"exploration_exposures", report.exploration_exposures},
              {"budget_exhausted", report.budget_exhausted},
              {"exploration_truncated", report.exploration_truncated},
              {"trace_events", report.trace.size()}};
}

}  // namespace mtorl::cli
