#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtorl/common/rng.hpp"
#include "mtorl/data/journey.hpp"

namespace mtorl::sim {

// Ground-truth oracle standing in for live ad traffic. Each user converts on
// channel j with a per-user probability; exposures charge the channel cost
// and pay gain_value on conversion. Profile features are the user's own
// probability row plus noise, so the preference signal is learnable.
struct EnvironmentConfig {
  int users = 0;
  int m = 0;
  std::vector<double> base_probs;  // [users x m] row-major conversion probabilities
  std::vector<double> costs;       // per-channel exposure cost, > 0
  double gain_value = 1.0;
  double drift = 0.0;          // per-round multiplicative jitter on the probabilities
  int q_dim = 2;               // width of the per-exposure context noise
  double profile_noise = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

// Probability matrix where user u converts at `dominant` on channel u % m
// and at `rest` elsewhere.
std::vector<double> separable_probs(int users, int m, double dominant, double rest);

// Stable zero-padded user name, identical across log generation and runs.
std::string user_name(int user);

class Environment {
 public:
  explicit Environment(EnvironmentConfig config);

  // One ad exposure: draws the conversion, charges the channel cost, stamps
  // a fresh timestamp. Deterministic given the seed and call sequence.
  data::Observation step(int user, int channel);

  // Applies one round of preference drift, clipped into [0, 1]. No-op and
  // no rng consumption when drift is zero.
  void advance_round();

  const EnvironmentConfig& config() const { return config_; }
  double prob(int user, int channel) const;
  const std::vector<double>& profile(int user) const;

  // Shared stream for every stochastic choice in a run, so one seed pins
  // the whole trajectory.
  Rng& rng() { return rng_; }

 private:
  EnvironmentConfig config_;
  std::vector<double> probs_;  // current, drifting
  std::vector<std::vector<double>> profiles_;
  Rng rng_;
  std::int64_t ts_ = 0;
};

// Behavior policy for synthetic journey logs: with probability greedy pick
// the user's currently best channel, otherwise uniform.
struct LogGenConfig {
  int observations_per_user = 40;
  double greedy = 0.6;

  void validate() const;
};

// Simulates round-robin exposures for every user and returns the journeys,
// profiles attached. Advances drift once per pass over the users.
std::vector<data::Journey> generate_log(Environment& env, const LogGenConfig& config);

}  // namespace mtorl::sim
