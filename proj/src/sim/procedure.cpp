#include "mtorl/sim/procedure.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "mtorl/common/errors.hpp"
#include "mtorl/model/network.hpp"
#include "mtorl/numerics/tape.hpp"

namespace mtorl::sim {

namespace {

void push_bounded(data::Journey& memory, data::Observation obs, int window) {
  memory.observations.push_back(std::move(obs));
  if (static_cast<int>(memory.observations.size()) > window) {
    memory.observations.erase(memory.observations.begin());
  }
}

void charge(RunState& state, const std::string& user_id, const data::Observation& obs, int round,
            double penalty_strength) {
  state.remaining -= obs.cost;
  state.cum_gain += obs.gain;
  state.cum_cost += obs.cost;
  const double penalized = obs.gain - penalty_strength * obs.cost;
  state.cum_penalized += penalized;
  state.trace.push_back(TraceEvent{round, user_id, obs.channel, obs.gain, obs.cost,
                                   state.remaining, penalized});
}

}  // namespace

ModelPolicy::ModelPolicy(io::Checkpoint checkpoint, int q_dim, int f_dim, bool mean_score)
    : checkpoint_(std::move(checkpoint)), mean_score_(mean_score) {
  checkpoint_.config.validate();
  model::validate_params(checkpoint_.config, checkpoint_.params);
  if (!checkpoint_.reward.fitted) {
    throw ConfigError("model policy needs a fitted reward spec in the checkpoint");
  }
  pipeline_.m = checkpoint_.config.m;
  pipeline_.n = checkpoint_.config.n;
  pipeline_.q_dim = q_dim;
  pipeline_.f_dim = f_dim;
  pipeline_.reward = checkpoint_.reward;
  if (pipeline_.fused_width() != checkpoint_.config.F) {
    throw ShapeError("feature widths fuse to " + std::to_string(pipeline_.fused_width()) +
                     " but the checkpoint's embed.weight expects F=" +
                     std::to_string(checkpoint_.config.F));
  }
}

std::pair<alloc::ChannelPolicy, double> ModelPolicy::infer(const data::Journey& memory) {
  const data::SequenceSample sample = data::tail_sample(memory, pipeline_);
  num::Tape tape;
  const auto ids = model::bind_params(tape, checkpoint_.params, false);
  const model::ForwardOutput out = model::forward(tape, ids, checkpoint_.config, sample);

  const num::Tensor& probs = tape.val(out.action_probs);
  const int n = pipeline_.n;
  const int m = pipeline_.m;
  alloc::ChannelPolicy policy;
  policy.probs.resize(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) policy.probs[static_cast<size_t>(j)] = probs.at(n - 1, j);

  const num::Tensor& preds = tape.val(out.reward_preds);
  auto step_score = [&](int t) {
    if (checkpoint_.config.reward_head == model::RewardHead::kSoftmax) {
      const int r = checkpoint_.config.reward_dim;
      double expectation = 0.0;
      for (int c = 0; c < r; ++c) expectation += static_cast<double>(c) * preds.at(t, c);
      return r > 1 ? expectation / static_cast<double>(r - 1) : 0.0;
    }
    return preds[t];
  };

  double score;
  if (mean_score_) {
    double sum = 0.0;
    int count = 0;
    for (int t = 0; t < n; ++t) {
      if (sample.valid_mask[static_cast<size_t>(t)]) {
        sum += step_score(t);
        ++count;
      }
    }
    score = sum / static_cast<double>(count);
  } else {
    score = step_score(n - 1);  // tail windows keep the last column valid
  }
  return {std::move(policy), score};
}

std::pair<alloc::ChannelPolicy, double> UniformPolicy::infer(const data::Journey&) {
  if (m_ < 1) throw ConfigError("uniform policy needs at least one channel");
  alloc::ChannelPolicy policy;
  policy.probs.assign(static_cast<size_t>(m_), 1.0 / static_cast<double>(m_));
  return {std::move(policy), 0.5};
}

std::pair<alloc::ChannelPolicy, double> FixedChannelPolicy::infer(const data::Journey&) {
  if (m_ < 1 || channel_ < 0 || channel_ >= m_) {
    throw ConfigError("fixed channel policy points outside the channel set");
  }
  alloc::ChannelPolicy policy;
  policy.probs.assign(static_cast<size_t>(m_), 0.0);
  policy.probs[static_cast<size_t>(channel_)] = 1.0;
  return {std::move(policy), 0.5};
}

void ProcedureConfig::validate(int m) const {
  if (!std::isfinite(budget) || budget < 0.0) throw ConfigError("budget must be finite and >= 0");
  if (max_exposures < 1) throw ConfigError("exposure cap must be >= 1");
  if (top_n < 1) throw ConfigError("users per round must be >= 1");
  if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) {
    throw ConfigError("weight averaging factor must lie in [0, 1]");
  }
  if (exploration_rounds < 1) throw ConfigError("exploration rounds must be >= 1");
  if (!std::isfinite(penalty_strength)) throw ConfigError("penalty strength must be finite");
  initial_policy.validate();
  if (static_cast<int>(initial_policy.probs.size()) != m) {
    throw ShapeError("initial policy covers " + std::to_string(initial_policy.probs.size()) +
                     " channels, environment has " + std::to_string(m));
  }
}

RunState explore(Environment& env, PolicyProvider& provider, const ProcedureConfig& config) {
  const EnvironmentConfig& ec = env.config();
  config.validate(ec.m);
  const int window = provider.memory_window();
  if (window < 1) throw ConfigError("memory window must be >= 1");

  RunState state;
  state.remaining = config.budget;
  state.memories.resize(static_cast<size_t>(ec.users));
  state.policies.resize(static_cast<size_t>(ec.users));
  for (int u = 0; u < ec.users; ++u) {
    data::Journey& j = state.memories[static_cast<size_t>(u)];
    j.user_id = user_name(u);
    j.f = env.profile(u);
    state.user_index[j.user_id] = u;
  }

  for (int round = 0; round < config.exploration_rounds && !state.exploration_truncated; ++round) {
    for (int u = 0; u < ec.users; ++u) {
      const int channel =
          env.rng().categorical(config.initial_policy.probs.data(), ec.m);
      if (ec.costs[static_cast<size_t>(channel)] > state.remaining) {
        state.exploration_truncated = true;
        break;
      }
      data::Observation obs = env.step(u, channel);
      charge(state, user_name(u), obs, 0, config.penalty_strength);
      push_bounded(state.memories[static_cast<size_t>(u)], std::move(obs), window);
    }
    env.advance_round();
  }

  for (int u = 0; u < ec.users; ++u) {
    data::Journey& memory = state.memories[static_cast<size_t>(u)];
    if (memory.observations.empty()) continue;
    auto [policy, score] = provider.infer(memory);
    state.policies[static_cast<size_t>(u)] = std::move(policy);
    state.rewards[memory.user_id] = score;
  }
  return state;
}

void exploit_round(RunState& state, PolicyProvider& provider, Environment& env,
                   const ProcedureConfig& config) {
  const EnvironmentConfig& ec = env.config();
  const int window = provider.memory_window();
  const alloc::UserRanking ranked = alloc::rank_users(state.rewards, config.top_n);
  for (const alloc::RankedUser& target : ranked) {
    if (state.exposures >= config.max_exposures || state.remaining <= 0.0) break;
    const int u = state.user_index.at(target.user_id);
    alloc::ChannelPolicy& policy = state.policies[static_cast<size_t>(u)];
    const int channel = model::select_action(
        policy.probs,
        config.stochastic ? model::ActionSelect::kStochastic : model::ActionSelect::kDeterministic,
        &env.rng());
    if (ec.costs[static_cast<size_t>(channel)] > state.remaining) {
      // the budget cannot cover the chosen exposure; hard stop
      state.budget_exhausted = true;
      return;
    }
    data::Observation obs = env.step(u, channel);
    ++state.exposures;
    charge(state, target.user_id, obs, state.exposures, config.penalty_strength);
    data::Journey& memory = state.memories[static_cast<size_t>(u)];
    push_bounded(memory, std::move(obs), window);
    auto [fresh, score] = provider.infer(memory);
    policy = alloc::merge_policies(config.initial_policy, fresh, config.eta);
    state.rewards[target.user_id] = score;
  }
  env.advance_round();
}

RunReport run_procedure(PolicyProvider& provider, Environment& env, const ProcedureConfig& config) {
  RunState state = explore(env, provider, config);
  if (!state.exploration_truncated) {
    while (!state.budget_exhausted && state.exposures < config.max_exposures &&
           state.remaining > 0.0 && !state.rewards.empty()) {
      exploit_round(state, provider, env, config);
    }
  }

  RunReport report;
  report.cum_penalized = state.cum_penalized;
  report.cum_gain = state.cum_gain;
  report.cum_cost = state.cum_cost;
  report.exposures = state.exposures;
  report.exploration_exposures =
      static_cast<int>(state.trace.size()) - state.exposures;
  report.budget_exhausted = state.budget_exhausted;
  report.exploration_truncated = state.exploration_truncated;
  report.trace = std::move(state.trace);
  return report;
}

void write_trace_csv(const std::string& path, const std::vector<TraceEvent>& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "round,user,channel,gain,cost,remaining_budget,penalized_reward\n";
  char buf[160];
  for (const TraceEvent& e : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.17g,%.17g,%.17g,%.17g", e.round,
                  e.user_id.c_str(), e.channel, e.gain, e.cost, e.remaining_budget, e.penalized);
    out << buf << '\n';
  }
  if (!out.flush()) throw DataError("failed writing trace to '" + path + "'");
}

}  // namespace mtorl::sim
