#pragma once

#include <nlohmann/json.hpp>

namespace mtorl::cli {

// Each command takes the effective configuration (file merged with
// overrides) and returns a process exit code. Failures print one
// structured JSON error line to stderr and return nonzero.
int cmd_gen_data(const nlohmann::json& config);
int cmd_train(const nlohmann::json& config);
int cmd_evaluate(const nlohmann::json& config);
int cmd_simulate(const nlohmann::json& config);
int cmd_allocate(const nlohmann::json& config);

// Parses argv, builds the effective configuration, and dispatches to the
// subcommand. Returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace mtorl::cli
