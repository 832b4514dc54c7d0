#include "mtorl/model/config.hpp"

#include "mtorl/common/errors.hpp"

namespace mtorl::model {

namespace {

void check(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

}  // namespace

RewardHead reward_head_from_string(const std::string& name) {
  if (name == "sigmoid") return RewardHead::kSigmoid;
  if (name == "bounded") return RewardHead::kBounded;
  if (name == "softmax") return RewardHead::kSoftmax;
  throw ConfigError("unknown reward head '" + name + "'");
}

std::string to_string(RewardHead head) {
  switch (head) {
    case RewardHead::kSigmoid: return "sigmoid";
    case RewardHead::kBounded: return "bounded";
    case RewardHead::kSoftmax: return "softmax";
  }
  throw ConfigError("invalid reward head value");
}

RewardHead reward_head_for(data::RewardMode mode) {
  switch (mode) {
    case data::RewardMode::kBinary: return RewardHead::kSigmoid;
    case data::RewardMode::kContinuous:
    case data::RewardMode::kFusion: return RewardHead::kBounded;
    case data::RewardMode::kOnehot: return RewardHead::kSoftmax;
  }
  throw ConfigError("invalid reward mode value");
}

int reward_dim_for(const data::RewardSpec& spec) {
  return spec.mode == data::RewardMode::kOnehot ? spec.classes : 1;
}

void ModelConfig::validate() const {
  check(d >= 1, "hidden size d must be >= 1");
  check(F >= 1, "fused width F must be resolved and >= 1");
  check(n >= 2, "sequence length n must be >= 2");
  check(m >= 1, "channel count m must be >= 1");
  check(L1 >= 1 && L2 >= 1 && L3 >= 1, "layer counts must be >= 1");
  check(kernel_size >= 1, "kernel size must be >= 1");
  check(static_cast<int>(dilations.size()) == L1, "dilation schedule length must equal L1");
  for (int dil : dilations) check(dil >= 1, "dilations must be >= 1");
  check(heads >= 1, "head count must be >= 1");
  check(d % heads == 0, "hidden size must divide evenly into heads");
  check(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  check(leaky_slope > 0.0 && leaky_slope < 1.0, "leaky slope must lie in (0, 1)");
  check(ln_eps > 0.0, "layer norm eps must be positive");
  if (reward_head == RewardHead::kSoftmax) {
    check(reward_dim >= 2, "softmax reward head needs at least 2 classes");
  } else {
    check(reward_dim == 1, "scalar reward heads need reward_dim 1");
  }
}

std::map<std::string, std::vector<int>> ModelConfig::expected_param_shapes() const {
  std::map<std::string, std::vector<int>> shapes;
  auto bias_shape = [this](int rows) {
    return per_position_bias ? std::vector<int>{rows, n} : std::vector<int>{rows};
  };
  shapes["embed.weight"] = {d, F};
  for (int l = 0; l < L1; ++l) {
    const std::string base = "encoder.conv" + std::to_string(l);
    if (weight_norm) {
      shapes[base + ".direction"] = {d, d, kernel_size};
      shapes[base + ".scale"] = {d};
    } else {
      shapes[base + ".kernel"] = {d, d, kernel_size};
    }
  }
  shapes["encoder.out.weight"] = {d, d};
  shapes["encoder.out.bias"] = bias_shape(d);
  shapes["attention.query.weight"] = {d, d};
  shapes["attention.key.weight"] = {d, d};
  shapes["attention.value.weight"] = {d, d};
  for (int l = 0; l < L2; ++l) {
    const std::string base = "attention.block" + std::to_string(l);
    shapes[base + ".weight"] = {d, d};
    shapes[base + ".bias"] = bias_shape(d);
    if (add_norm) {
      shapes[base + ".ln_gain"] = {d};
      shapes[base + ".ln_bias"] = {d};
    }
  }
  shapes["action_head.weight"] = {m, d};
  shapes["action_head.bias"] = bias_shape(m);
  for (int l = 0; l < L3; ++l) {
    const std::string base = "reward.mlp" + std::to_string(l);
    shapes[base + ".weight"] = {d, d};
    shapes[base + ".bias"] = bias_shape(d);
  }
  shapes["reward.head.weight"] = {reward_dim, d};
  shapes["reward.head.bias"] = bias_shape(reward_dim);
  return shapes;
}

}  // namespace mtorl::model
