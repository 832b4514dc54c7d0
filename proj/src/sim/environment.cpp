#include "mtorl/sim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "mtorl/common/errors.hpp"

namespace mtorl::sim {

void EnvironmentConfig::validate() const {
  if (users < 1) throw ConfigError("environment needs at least one user");
  if (m < 1) throw ConfigError("environment needs at least one channel");
  if (base_probs.size() != static_cast<size_t>(users) * static_cast<size_t>(m)) {
    throw ShapeError("base probabilities hold " + std::to_string(base_probs.size()) +
                     " entries, expected " + std::to_string(users * m));
  }
  for (double p : base_probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ConfigError("conversion probabilities must lie in [0, 1]");
    }
  }
  if (costs.size() != static_cast<size_t>(m)) {
    throw ShapeError("costs hold " + std::to_string(costs.size()) + " entries, expected " +
                     std::to_string(m));
  }
  for (double w : costs) {
    if (!std::isfinite(w) || w <= 0.0) throw ConfigError("channel costs must be positive");
  }
  if (!std::isfinite(gain_value) || gain_value <= 0.0) {
    throw ConfigError("gain value must be positive");
  }
  if (!std::isfinite(drift) || drift < 0.0) throw ConfigError("drift rate must be >= 0");
  if (q_dim < 0) throw ConfigError("context feature width must be >= 0");
  if (!std::isfinite(profile_noise) || profile_noise < 0.0) {
    throw ConfigError("profile noise must be >= 0");
  }
}

std::vector<double> separable_probs(int users, int m, double dominant, double rest) {
  if (users < 1 || m < 1) throw ConfigError("separable environment needs users and channels");
  std::vector<double> probs(static_cast<size_t>(users) * static_cast<size_t>(m), rest);
  for (int u = 0; u < users; ++u) {
    probs[static_cast<size_t>(u) * static_cast<size_t>(m) + static_cast<size_t>(u % m)] = dominant;
  }
  return probs;
}

std::string user_name(int user) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "u%05d", user);
  return buf;
}

Environment::Environment(EnvironmentConfig config)
    : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  probs_ = config_.base_probs;
  profiles_.resize(static_cast<size_t>(config_.users));
  for (int u = 0; u < config_.users; ++u) {
    std::vector<double>& f = profiles_[static_cast<size_t>(u)];
    f.resize(static_cast<size_t>(config_.m));
    for (int j = 0; j < config_.m; ++j) {
      double v = prob(u, j);
      if (config_.profile_noise > 0.0) v += rng_.normal(0.0, config_.profile_noise);
      f[static_cast<size_t>(j)] = std::clamp(v, 0.0, 1.0);
    }
  }
}

double Environment::prob(int user, int channel) const {
  if (user < 0 || user >= config_.users) throw DataError("user index out of range");
  if (channel < 0 || channel >= config_.m) throw DataError("channel index out of range");
  return probs_[static_cast<size_t>(user) * static_cast<size_t>(config_.m) +
                static_cast<size_t>(channel)];
}

const std::vector<double>& Environment::profile(int user) const {
  if (user < 0 || user >= config_.users) throw DataError("user index out of range");
  return profiles_[static_cast<size_t>(user)];
}

data::Observation Environment::step(int user, int channel) {
  const double p = prob(user, channel);  // also range-checks
  data::Observation obs;
  obs.ts = ++ts_;
  obs.channel = channel;
  obs.q.resize(static_cast<size_t>(config_.q_dim));
  for (double& v : obs.q) v = rng_.normal(0.0, 1.0);
  obs.gain = rng_.bernoulli(p) ? config_.gain_value : 0.0;
  obs.cost = config_.costs[static_cast<size_t>(channel)];
  return obs;
}

void Environment::advance_round() {
  if (config_.drift == 0.0) return;
  for (double& p : probs_) {
    const double jitter = 1.0 + config_.drift * (2.0 * rng_.uniform() - 1.0);
    p = std::clamp(p * jitter, 0.0, 1.0);
  }
}

void LogGenConfig::validate() const {
  if (observations_per_user < 1) throw ConfigError("log generation needs at least one observation per user");
  if (!std::isfinite(greedy) || greedy < 0.0 || greedy > 1.0) {
    throw ConfigError("behavior greediness must lie in [0, 1]");
  }
}

std::vector<data::Journey> generate_log(Environment& env, const LogGenConfig& config) {
  config.validate();
  const EnvironmentConfig& ec = env.config();
  std::vector<data::Journey> journeys(static_cast<size_t>(ec.users));
  for (int u = 0; u < ec.users; ++u) {
    data::Journey& j = journeys[static_cast<size_t>(u)];
    j.user_id = user_name(u);
    j.f = env.profile(u);
    j.observations.reserve(static_cast<size_t>(config.observations_per_user));
  }
  for (int round = 0; round < config.observations_per_user; ++round) {
    for (int u = 0; u < ec.users; ++u) {
      int channel;
      if (env.rng().bernoulli(config.greedy)) {
        channel = 0;
        for (int j = 1; j < ec.m; ++j) {
          if (env.prob(u, j) > env.prob(u, channel)) channel = j;
        }
      } else {
        channel = env.rng().uniform_int(ec.m);
      }
      journeys[static_cast<size_t>(u)].observations.push_back(env.step(u, channel));
    }
    env.advance_round();
  }
  return journeys;
}

}  // namespace mtorl::sim
