#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>

#include "mtorl/alloc/allocation.hpp"
#include "mtorl/sim/environment.hpp"
#include "mtorl/sim/procedure.hpp"
#include "mtorl/train/metrics.hpp"
#include "mtorl/train/trainer.hpp"

namespace mtorl::cli {

// Reads the file as JSON; an empty path yields an empty object so every
// command can run on pure defaults.
nlohmann::json load_config(const std::string& path);

// Applies one "dotted.path=value" assignment. The value is parsed as JSON
// when possible and treated as a string otherwise; intermediate objects are
// created on demand.
void apply_override(nlohmann::json& config, const std::string& assignment);

// Rejects unknown top-level sections so typos fail loudly. One file may
// carry sections for several subcommands.
void check_top_level(const nlohmann::json& config);

// Input file locations from the "data" section.
struct DataPaths {
  std::string journeys;
  std::string profiles;
  std::string predictions;
  std::string checkpoint;
};

// Procedure settings plus the command-level simulate switches that live in
// the same "procedure" section.
struct SimulateSettings {
  sim::ProcedureConfig procedure;
  std::string policy = "model";  // model | random | greedy
  int memory_window = 20;        // baselines only; the model brings its own
  bool mean_score = false;
  bool penalty_set = false;  // whether the config named penalty_strength
};

struct AllocateSettings {
  double tau = 0.5;
  double alpha = 0.0;  // share of the implicit policy in the merge
  int top_n = 10;
  int m = 0;  // channel count; 0 = infer from the log
};

struct EvaluateSettings {
  std::string split = "all";  // all | train | validation | test
  bool micro = false;
};

// Section converters, strict about unknown keys inside the section.
DataPaths data_paths_from_json(const nlohmann::json& j);
train::TrainConfig train_config_from_json(const nlohmann::json& j);
sim::EnvironmentConfig environment_config_from_json(const nlohmann::json& j, std::uint64_t seed);
sim::LogGenConfig log_gen_config_from_json(const nlohmann::json& j);
SimulateSettings simulate_settings_from_json(const nlohmann::json& j, int m);
AllocateSettings allocate_settings_from_json(const nlohmann::json& j);
EvaluateSettings evaluate_settings_from_json(const nlohmann::json& j);

nlohmann::json to_json(const train::EvalReport& report);
nlohmann::json to_json(const alloc::ChannelPolicy& policy);
nlohmann::json to_json(const alloc::UserRanking& ranking);
nlohmann::json to_json(const sim::RunReport& report);  // trace excluded, see the csv

}  // namespace mtorl::cli
