#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtorl/common/rng.hpp"
#include "mtorl/data/dataset.hpp"
#include "mtorl/model/config.hpp"
#include "mtorl/numerics/tape.hpp"
#include "mtorl/numerics/tensor.hpp"

namespace mtorl::model {

struct ModelParams {
  std::map<std::string, num::Tensor> tensors;
};

// Gaussian(0, 0.02) weights, zero biases, unit layer-norm gains; weight
// norm scales start at each direction slice's norm so the initial kernel
// equals its direction.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Throws ConfigError naming the first missing, extra, or misshapen tensor.
void validate_params(const ModelConfig& config, const ModelParams& params);

// Registers every parameter on the tape; tracked parameters accumulate
// gradients during backward().
std::map<std::string, num::VarId> bind_params(num::Tape& tape, const ModelParams& params, bool track);

struct ForwardOutput {
  num::VarId causal_states;  // [d x n]
  num::VarId attended;       // [d x n]
  num::VarId action_probs;   // [n x m], rows on the simplex
  num::VarId reward_preds;   // [n] for scalar heads, [n x classes] for softmax
};

// Full forward pass over one window. valid_mask hides padded columns from
// attention keys; dropout fires only when training is true and consumes
// dropout_rng.
ForwardOutput forward(num::Tape& tape, const std::map<std::string, num::VarId>& params,
                      const ModelConfig& config, const num::Tensor& fused,
                      const std::vector<std::uint8_t>& valid_mask, bool training = false,
                      Rng* dropout_rng = nullptr);

ForwardOutput forward(num::Tape& tape, const std::map<std::string, num::VarId>& params,
                      const ModelConfig& config, const data::SequenceSample& sample,
                      bool training = false, Rng* dropout_rng = nullptr);

enum class ActionSelect { kDeterministic, kStochastic };

// Deterministic: argmax with lowest-index tie-break. Stochastic: one draw
// from the categorical distribution. Throws on non-finite probabilities.
int select_action(const double* probs, int m, ActionSelect mode, Rng* rng = nullptr);
int select_action(const std::vector<double>& probs, ActionSelect mode, Rng* rng = nullptr);

}  // namespace mtorl::model
