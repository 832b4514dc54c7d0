#include "mtorl/model/network.hpp"

#include <cmath>

#include "mtorl/common/errors.hpp"

namespace mtorl::model {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ModelParams params;
  for (const auto& [name, shape] : config.expected_param_shapes()) {
    num::Tensor t(shape);
    if (ends_with(name, ".ln_gain")) {
      for (int i = 0; i < t.size(); ++i) t[i] = 1.0;
    } else if (ends_with(name, ".bias") || ends_with(name, ".ln_bias")) {
      // zeros
    } else if (ends_with(name, ".scale")) {
      // norm of the matching direction slice, initialized just before this
      // name in map order
      const num::Tensor& dir =
          params.tensors.at(name.substr(0, name.size() - 6) + ".direction");
      const int per = dir.dim(1) * dir.dim(2);
      for (int o = 0; o < t.size(); ++o) {
        double sq = 0.0;
        const double* v = dir.data() + static_cast<size_t>(o) * per;
        for (int i = 0; i < per; ++i) sq += v[i] * v[i];
        t[o] = std::sqrt(sq);
      }
    } else {
      for (int i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0, 0.02);
    }
    params.tensors.emplace(name, std::move(t));
  }
  return params;
}

void validate_params(const ModelConfig& config, const ModelParams& params) {
  const auto expected = config.expected_param_shapes();
  for (const auto& [name, shape] : expected) {
    auto it = params.tensors.find(name);
    if (it == params.tensors.end()) throw ConfigError("missing parameter tensor '" + name + "'");
    if (it->second.shape() != shape) {
      throw ConfigError("parameter '" + name + "' has shape " + num::shape_str(it->second.shape()) +
                        ", expected " + num::shape_str(shape));
    }
  }
  for (const auto& [name, tensor] : params.tensors) {
    if (expected.find(name) == expected.end()) {
      throw ConfigError("unexpected parameter tensor '" + name + "'");
    }
  }
}

std::map<std::string, num::VarId> bind_params(num::Tape& tape, const ModelParams& params, bool track) {
  std::map<std::string, num::VarId> ids;
  for (const auto& [name, tensor] : params.tensors) {
    ids[name] = track ? tape.param(name, tensor) : tape.constant(tensor);
  }
  return ids;
}

ForwardOutput forward(num::Tape& t, const std::map<std::string, num::VarId>& params,
                      const ModelConfig& cfg, const num::Tensor& fused,
                      const std::vector<std::uint8_t>& valid_mask, bool training, Rng* dropout_rng) {
  if (fused.rank() != 2 || fused.rows() != cfg.F || fused.cols() != cfg.n) {
    throw ShapeError("fused input " + num::shape_str(fused.shape()) + ", expected [" +
                     std::to_string(cfg.F) + "x" + std::to_string(cfg.n) + "]");
  }
  if (static_cast<int>(valid_mask.size()) != cfg.n) {
    throw ShapeError("valid mask length must equal sequence length");
  }
  const bool dropping = training && cfg.dropout > 0.0;
  if (dropping && dropout_rng == nullptr) {
    throw ConfigError("training forward with dropout needs an rng");
  }

  auto P = [&params](const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw ConfigError("parameter '" + name + "' not bound");
    return it->second;
  };
  auto add_bias = [&](num::VarId x, const std::string& name) {
    return cfg.per_position_bias ? num::add(t, x, P(name)) : num::add_col_broadcast(t, x, P(name));
  };
  auto maybe_dropout = [&](num::VarId x) {
    if (!dropping) return x;
    const double keep = 1.0 - cfg.dropout;
    num::Tensor mask = t.val(x).zeros_like();
    for (int i = 0; i < mask.size(); ++i) {
      mask[i] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
    }
    return num::hadamard(t, x, t.constant(std::move(mask)));
  };

  num::VarId x = num::matmul(t, P("embed.weight"), t.constant(fused));

  num::VarId s = x;
  if (cfg.causal_state) {
    num::VarId h = x;
    for (int l = 0; l < cfg.L1; ++l) {
      const std::string base = "encoder.conv" + std::to_string(l);
      num::VarId kernel = cfg.weight_norm
                              ? num::weight_norm_kernel(t, P(base + ".direction"), P(base + ".scale"))
                              : P(base + ".kernel");
      num::VarId c = num::dilated_causal_conv1d(t, h, kernel, cfg.dilations[static_cast<size_t>(l)]);
      num::VarId a = num::leaky_relu(t, c, cfg.leaky_slope);
      h = num::add(t, maybe_dropout(a), h);
    }
    s = num::leaky_relu(t, add_bias(num::matmul(t, P("encoder.out.weight"), h), "encoder.out.bias"),
                        cfg.leaky_slope);
  }

  num::VarId attended = s;
  if (cfg.causal_attention) {
    num::VarId sT = num::transpose(t, s);
    num::VarId q = num::matmul(t, sT, P("attention.query.weight"));
    num::VarId k = num::matmul(t, sT, P("attention.key.weight"));
    num::VarId v = num::matmul(t, sT, P("attention.value.weight"));
    const int dh = cfg.head_dim();
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<num::VarId> head_outs;
    for (int h = 0; h < cfg.heads; ++h) {
      num::VarId qh = cfg.heads == 1 ? q : num::slice_cols(t, q, h * dh, (h + 1) * dh);
      num::VarId kh = cfg.heads == 1 ? k : num::slice_cols(t, k, h * dh, (h + 1) * dh);
      num::VarId vh = cfg.heads == 1 ? v : num::slice_cols(t, v, h * dh, (h + 1) * dh);
      num::VarId scores = num::scale(t, num::matmul(t, qh, num::transpose(t, kh)), inv_scale);
      num::VarId probs = num::masked_softmax(t, scores, &valid_mask);
      head_outs.push_back(num::matmul(t, probs, vh));
    }
    num::VarId attn = head_outs.size() == 1 ? head_outs[0] : num::concat_cols(t, head_outs);
    num::VarId mcur = num::transpose(t, attn);
    for (int l = 0; l < cfg.L2; ++l) {
      const std::string base = "attention.block" + std::to_string(l);
      num::VarId pre = add_bias(num::matmul(t, P(base + ".weight"), mcur), base + ".bias");
      num::VarId res = num::add(t, mcur, maybe_dropout(num::leaky_relu(t, pre, cfg.leaky_slope)));
      mcur = cfg.add_norm
                 ? num::layer_norm(t, res, P(base + ".ln_gain"), P(base + ".ln_bias"), cfg.ln_eps)
                 : res;
    }
    attended = mcur;
  }

  num::VarId z =
      num::transpose(t, add_bias(num::matmul(t, P("action_head.weight"), attended), "action_head.bias"));
  num::VarId action_probs = num::softmax_rows(t, z);

  num::VarId ncur = s;
  for (int l = 0; l < cfg.L3; ++l) {
    const std::string base = "reward.mlp" + std::to_string(l);
    ncur = num::leaky_relu(t, add_bias(num::matmul(t, P(base + ".weight"), ncur), base + ".bias"),
                           cfg.leaky_slope);
  }
  num::VarId rpre = add_bias(num::matmul(t, P("reward.head.weight"), ncur), "reward.head.bias");
  num::VarId reward_preds;
  if (cfg.reward_head == RewardHead::kSoftmax) {
    reward_preds = num::softmax_rows(t, num::transpose(t, rpre));
  } else {
    reward_preds = num::reshape(t, num::sigmoid(t, rpre), {cfg.n});
  }

  return ForwardOutput{s, attended, action_probs, reward_preds};
}

ForwardOutput forward(num::Tape& tape, const std::map<std::string, num::VarId>& params,
                      const ModelConfig& config, const data::SequenceSample& sample, bool training,
                      Rng* dropout_rng) {
  return forward(tape, params, config, sample.fused, sample.valid_mask, training, dropout_rng);
}

int select_action(const double* probs, int m, ActionSelect mode, Rng* rng) {
  if (m < 1) throw ShapeError("action selection needs at least one channel");
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(probs[i])) throw DataError("non-finite action probability");
  }
  if (mode == ActionSelect::kStochastic) {
    if (rng == nullptr) throw ConfigError("stochastic action selection needs an rng");
    return rng->categorical(probs, m);
  }
  int best = 0;
  for (int i = 1; i < m; ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

int select_action(const std::vector<double>& probs, ActionSelect mode, Rng* rng) {
  return select_action(probs.data(), static_cast<int>(probs.size()), mode, rng);
}

}  // namespace mtorl::model
