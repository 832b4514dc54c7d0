#include "mtorl/alloc/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtorl/common/errors.hpp"
#include "mtorl/common/log.hpp"

namespace mtorl::alloc {

namespace {

ChannelPolicy normalize_or_uniform(const std::vector<double>& weights, const char* what) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  ChannelPolicy policy;
  policy.probs.resize(weights.size());
  if (sum <= 0.0) {
    logging::warn(std::string(what) + " weights are all zero; falling back to uniform");
    const double u = 1.0 / static_cast<double>(weights.size());
    std::fill(policy.probs.begin(), policy.probs.end(), u);
    return policy;
  }
  for (size_t j = 0; j < weights.size(); ++j) policy.probs[j] = weights[j] / sum;
  return policy;
}

std::vector<double> rates(const std::vector<long long>& counts,
                          const std::vector<long long>& exposures) {
  std::vector<double> out(counts.size(), 0.0);
  for (size_t j = 0; j < counts.size(); ++j) {
    if (exposures[j] > 0) {
      out[j] = static_cast<double>(counts[j]) / static_cast<double>(exposures[j]);
    }
  }
  return out;
}

void check_tau(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0 || tau >= 1.0) {
    throw ConfigError("reward threshold must lie in (0, 1)");
  }
}

}  // namespace

void ChannelPolicy::validate() const {
  if (probs.empty()) throw ConfigError("channel policy is empty");
  double sum = 0.0;
  for (size_t j = 0; j < probs.size(); ++j) {
    if (!std::isfinite(probs[j]) || probs[j] < 0.0) {
      throw ConfigError("channel policy entry " + std::to_string(j) + " is negative or non-finite");
    }
    sum += probs[j];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("channel policy sums to " + std::to_string(sum) + ", expected 1");
  }
}

void ChannelStats::validate() const {
  if (exposures.empty()) throw ConfigError("channel stats are empty");
  if (positives.size() != exposures.size() || predicted_positives.size() != exposures.size()) {
    throw ShapeError("channel stats vectors disagree on channel count");
  }
  for (size_t j = 0; j < exposures.size(); ++j) {
    if (exposures[j] < 0 || positives[j] < 0 || predicted_positives[j] < 0) {
      throw ConfigError("channel " + std::to_string(j) + " has a negative count");
    }
    if (positives[j] > exposures[j] || predicted_positives[j] > exposures[j]) {
      throw ConfigError("channel " + std::to_string(j) + " has more positives than exposures");
    }
  }
}

ChannelStats accumulate_stats(int m, const std::vector<int>& channels,
                              const std::vector<double>& gains,
                              const std::vector<double>* preds, double tau) {
  if (m < 1) throw ConfigError("channel count must be >= 1");
  check_tau(tau);
  if (gains.size() != channels.size()) {
    throw ShapeError("gains and channels disagree on exposure count");
  }
  if (preds && preds->size() != channels.size()) {
    throw ShapeError("predictions and channels disagree on exposure count");
  }

  ChannelStats stats;
  stats.exposures.assign(static_cast<size_t>(m), 0);
  stats.positives.assign(static_cast<size_t>(m), 0);
  stats.predicted_positives.assign(static_cast<size_t>(m), 0);
  for (size_t i = 0; i < channels.size(); ++i) {
    const int c = channels[i];
    if (c < 0 || c >= m) {
      throw DataError("exposure " + std::to_string(i) + " names channel " + std::to_string(c) +
                      ", outside [0, " + std::to_string(m) + ")");
    }
    if (!std::isfinite(gains[i])) {
      throw DataError("exposure " + std::to_string(i) + " has a non-finite gain");
    }
    const auto j = static_cast<size_t>(c);
    ++stats.exposures[j];
    if (gains[i] > 0.0) ++stats.positives[j];
    if (preds) {
      const double r = (*preds)[i];
      if (!std::isfinite(r)) {
        throw DataError("exposure " + std::to_string(i) + " has a non-finite predicted reward");
      }
      if (r > tau) ++stats.predicted_positives[j];
    }
  }
  return stats;
}

ChannelPolicy explicit_policy(const ChannelStats& stats) {
  stats.validate();
  long long total = 0;
  for (long long n : stats.exposures) total += n;
  if (total == 0) throw DataError("no channel has exposures");
  return normalize_or_uniform(rates(stats.positives, stats.exposures), "observed positive rate");
}

ChannelPolicy implicit_policy(const ChannelStats& stats) {
  stats.validate();
  long long total = 0;
  for (long long n : stats.exposures) total += n;
  if (total == 0) throw DataError("no channel has exposures");
  return normalize_or_uniform(rates(stats.predicted_positives, stats.exposures),
                              "thresholded prediction rate");
}

ChannelPolicy implicit_policy(const std::vector<std::vector<double>>& preds_by_channel,
                              double tau) {
  if (preds_by_channel.empty()) throw ConfigError("channel policy needs at least one channel");
  check_tau(tau);
  ChannelStats stats;
  const size_t m = preds_by_channel.size();
  stats.exposures.assign(m, 0);
  stats.positives.assign(m, 0);
  stats.predicted_positives.assign(m, 0);
  for (size_t j = 0; j < m; ++j) {
    stats.exposures[j] = static_cast<long long>(preds_by_channel[j].size());
    for (double r : preds_by_channel[j]) {
      if (!std::isfinite(r)) {
        throw DataError("channel " + std::to_string(j) + " has a non-finite predicted reward");
      }
      if (r > tau) ++stats.predicted_positives[j];
    }
  }
  return implicit_policy(stats);
}

ChannelPolicy merge_policies(const ChannelPolicy& lhs, const ChannelPolicy& rhs, double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) {
    throw ConfigError("merge weight must lie in [0, 1]");
  }
  lhs.validate();
  rhs.validate();
  if (lhs.probs.size() != rhs.probs.size()) {
    throw ShapeError("policies disagree on channel count");
  }
  ChannelPolicy out;
  out.probs.resize(lhs.probs.size());
  for (size_t j = 0; j < lhs.probs.size(); ++j) {
    out.probs[j] = (1.0 - alpha) * lhs.probs[j] + alpha * rhs.probs[j];
  }
  return out;
}

UserRanking rank_users(const std::map<std::string, double>& reward_memory, int n) {
  if (n < 1) throw ConfigError("ranking size must be >= 1");
  UserRanking ranking;
  ranking.reserve(reward_memory.size());
  for (const auto& [user, score] : reward_memory) {
    if (!std::isfinite(score)) throw DataError("user '" + user + "' has a non-finite score");
    ranking.push_back(RankedUser{user, score});
  }
  // the map iterates in ascending user id, so a stable sort on score alone
  // yields the id tie-break for free
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const RankedUser& a, const RankedUser& b) { return a.score > b.score; });
  if (ranking.size() > static_cast<size_t>(n)) ranking.resize(static_cast<size_t>(n));
  return ranking;
}

}  // namespace mtorl::alloc
