#pragma once

#include <map>
#include <string>
#include <vector>

#include "mtorl/data/dataset.hpp"

namespace mtorl::model {

// Final activation of the reward decoder. Bounded is the (0,1) map used
// for normalized continuous rewards; softmax serves class-valued rewards.
enum class RewardHead { kSigmoid, kBounded, kSoftmax };

RewardHead reward_head_from_string(const std::string& name);
std::string to_string(RewardHead head);

// Head and output width implied by a reward spec.
RewardHead reward_head_for(data::RewardMode mode);
int reward_dim_for(const data::RewardSpec& spec);

struct ModelConfig {
  int d = 64;   // hidden size (desk-scale default; reference setup uses 512)
  int F = -1;   // fused input width, resolved from the data pipeline
  int n = 20;   // sequence length
  int m = 2;    // channel count
  int L1 = 2;   // encoder conv layers
  int L2 = 2;   // attention blocks
  int L3 = 3;   // reward decoder layers
  int kernel_size = 3;
  std::vector<int> dilations = {1, 2};  // length L1
  int heads = 1;
  double dropout = 0.1;
  double leaky_slope = 0.01;
  double ln_eps = 1e-5;
  bool weight_norm = true;
  // Biases are per-position [rows x n] by default; false collapses them to
  // a per-feature [rows] broadcast, which also makes losses independent of
  // how much left-padding a window carries.
  bool per_position_bias = true;
  RewardHead reward_head = RewardHead::kSigmoid;
  int reward_dim = 1;  // classes for the softmax head, else 1
  // Ablation switches: disabling a stage turns it into a pass-through.
  bool causal_state = true;
  bool causal_attention = true;
  bool add_norm = true;

  int head_dim() const { return d / heads; }

  // Throws ConfigError on any out-of-range or inconsistent field.
  void validate() const;

  // Name -> shape of every parameter tensor this configuration owns; the
  // single source of truth for init, binding, and checkpoint validation.
  std::map<std::string, std::vector<int>> expected_param_shapes() const;
};

}  // namespace mtorl::model
