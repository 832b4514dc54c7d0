#pragma once

#include <string>

#include "mtorl/data/dataset.hpp"
#include "mtorl/model/config.hpp"
#include "mtorl/model/network.hpp"

namespace mtorl::io {

// Everything needed to run a trained model: architecture, the fitted
// reward spec, and the parameter tensors.
struct Checkpoint {
  model::ModelConfig config;
  data::RewardSpec reward;
  model::ModelParams params;
};

// Binary format, little-endian throughout: magic, format version, a JSON
// config blob, then named f64 tensors. Saving the same checkpoint twice
// produces byte-identical files.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);

// Throws DataError on a corrupt or truncated file and ConfigError when the
// tensors do not match the embedded architecture.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mtorl::io
