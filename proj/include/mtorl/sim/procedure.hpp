#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mtorl/alloc/allocation.hpp"
#include "mtorl/data/dataset.hpp"
#include "mtorl/io/checkpoint.hpp"
#include "mtorl/sim/environment.hpp"

namespace mtorl::sim {

// Per-user policy and reliability score for the procedure loop, refreshed
// from the user's current journey memory.
class PolicyProvider {
 public:
  virtual ~PolicyProvider() = default;
  virtual std::pair<alloc::ChannelPolicy, double> infer(const data::Journey& memory) = 0;
  // FIFO capacity of each journey memory.
  virtual int memory_window() const = 0;
};

// Trained checkpoint driving the loop. Scores are the reward prediction at
// the most recent step, or the mean over valid steps when mean_score is set;
// a class-distribution head scores by its normalized expected class.
class ModelPolicy : public PolicyProvider {
 public:
  ModelPolicy(io::Checkpoint checkpoint, int q_dim, int f_dim, bool mean_score = false);
  std::pair<alloc::ChannelPolicy, double> infer(const data::Journey& memory) override;
  int memory_window() const override { return pipeline_.n; }
  const data::PipelineConfig& pipeline() const { return pipeline_; }

 private:
  io::Checkpoint checkpoint_;
  data::PipelineConfig pipeline_;
  bool mean_score_;
};

// Baseline: uniform channel policy, constant score.
class UniformPolicy : public PolicyProvider {
 public:
  UniformPolicy(int m, int window) : m_(m), window_(window) {}
  std::pair<alloc::ChannelPolicy, double> infer(const data::Journey& memory) override;
  int memory_window() const override { return window_; }

 private:
  int m_;
  int window_;
};

// Baseline: every user gets the same one-hot channel (global best-rate pick).
class FixedChannelPolicy : public PolicyProvider {
 public:
  FixedChannelPolicy(int channel, int m, int window) : channel_(channel), m_(m), window_(window) {}
  std::pair<alloc::ChannelPolicy, double> infer(const data::Journey& memory) override;
  int memory_window() const override { return window_; }

 private:
  int channel_;
  int m_;
  int window_;
};

struct ProcedureConfig {
  double budget = 0.0;         // W; zero means no exposure can be afforded
  int max_exposures = 1;       // K, bounds exploitation exposures
  int top_n = 1;               // users served per exploitation round
  double eta = 0.5;            // share of the model policy in the weight average
  int exploration_rounds = 1;  // exposures per user before exploitation
  bool stochastic = false;     // exploitation channel selection mode
  double penalty_strength = 0.5;
  alloc::ChannelPolicy initial_policy;

  void validate(int m) const;
};

struct TraceEvent {
  int round = 0;  // 0 during exploration, else the exposure counter k
  std::string user_id;
  int channel = 0;
  double gain = 0.0;
  double cost = 0.0;
  double remaining_budget = 0.0;
  double penalized = 0.0;  // gain - s * cost

  bool operator==(const TraceEvent&) const = default;
};

struct RunState {
  std::vector<data::Journey> memories;         // index = environment user
  std::vector<alloc::ChannelPolicy> policies;  // empty until first inference
  std::map<std::string, double> rewards;       // ranking scores by user id
  std::map<std::string, int> user_index;
  double remaining = 0.0;
  int exposures = 0;  // exploitation counter k
  double cum_gain = 0.0;
  double cum_cost = 0.0;
  double cum_penalized = 0.0;
  std::vector<TraceEvent> trace;
  bool budget_exhausted = false;      // an affordable exposure no longer exists
  bool exploration_truncated = false;
};

struct RunReport {
  double cum_penalized = 0.0;
  double cum_gain = 0.0;
  double cum_cost = 0.0;
  int exposures = 0;  // exploitation only
  int exploration_exposures = 0;
  bool budget_exhausted = false;
  bool exploration_truncated = false;
  std::vector<TraceEvent> trace;
};

// Seeds every journey memory with stochastic draws from the initial policy,
// then runs one inference per reached user to fill the policy and reward
// memories. Stops early, flagged, when the budget cannot cover a draw.
RunState explore(Environment& env, PolicyProvider& provider, const ProcedureConfig& config);

// One exploitation round: rank users by score, serve the top N, refresh
// each served user's memory, policy (weight-averaged back toward the
// initial policy), and score. Charges the budget per exposure and stops
// mid-loop the moment the exposure cap or the budget is hit.
void exploit_round(RunState& state, PolicyProvider& provider, Environment& env,
                   const ProcedureConfig& config);

// Full loop: explore, then exploit until the exposure cap or the budget
// runs out. Deterministic given the environment seed and configs.
RunReport run_procedure(PolicyProvider& provider, Environment& env, const ProcedureConfig& config);

// round,user,channel,gain,cost,remaining_budget,penalized_reward
void write_trace_csv(const std::string& path, const std::vector<TraceEvent>& trace);

}  // namespace mtorl::sim
