#include "mtorl/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mtorl/common/errors.hpp"
#include "mtorl/common/log.hpp"
#include "mtorl/common/rng.hpp"

namespace mtorl::data {

namespace {

int gain_class(double gain, int classes) {
  long cls = std::lround(gain);
  if (cls < 0) cls = 0;
  if (cls >= classes) cls = classes - 1;
  return static_cast<int>(cls);
}

// user -> 0 train / 1 validation / 2 test, filling the 0.8/0.1/0.1 sample
// quotas in seeded-shuffle order so no user straddles splits.
std::map<std::string, int> assign_splits(std::vector<std::pair<std::string, std::size_t>> user_counts,
                                         std::uint64_t seed, std::size_t total) {
  std::sort(user_counts.begin(), user_counts.end());
  Rng rng(seed);
  rng.shuffle(user_counts);
  const auto train_target = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(total)));
  const auto val_target = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(total)));
  std::size_t train_count = 0, val_count = 0;
  std::map<std::string, int> assignment;
  for (const auto& [user, count] : user_counts) {
    if (train_count < train_target) {
      assignment[user] = 0;
      train_count += count;
    } else if (val_count < val_target) {
      assignment[user] = 1;
      val_count += count;
    } else {
      assignment[user] = 2;
    }
  }
  return assignment;
}

}  // namespace

RewardMode reward_mode_from_string(const std::string& name) {
  if (name == "binary") return RewardMode::kBinary;
  if (name == "continuous") return RewardMode::kContinuous;
  if (name == "fusion") return RewardMode::kFusion;
  if (name == "onehot") return RewardMode::kOnehot;
  throw ConfigError("unknown reward mode '" + name + "'");
}

std::string to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::kBinary: return "binary";
    case RewardMode::kContinuous: return "continuous";
    case RewardMode::kFusion: return "fusion";
    case RewardMode::kOnehot: return "onehot";
  }
  throw ConfigError("invalid reward mode value");
}

int PipelineConfig::fused_width() const {
  if (q_dim < 0 || f_dim < 0) throw ConfigError("feature dimensions not resolved yet");
  const int rw = reward.reward_width();
  if (rw <= 0) throw ConfigError("reward width not resolved (onehot classes unfitted)");
  return m + rw + q_dim + f_dim;
}

std::vector<double> build_state(const Observation& obs, const std::vector<double>& f) {
  std::vector<double> state;
  state.reserve(obs.q.size() + f.size());
  state.insert(state.end(), obs.q.begin(), obs.q.end());
  state.insert(state.end(), f.begin(), f.end());
  return state;
}

std::vector<double> encode_action(int channel, int m) {
  if (channel < 0 || channel >= m) {
    throw DataError("channel " + std::to_string(channel) + " outside [0, " + std::to_string(m) + ")");
  }
  std::vector<double> onehot(static_cast<std::size_t>(m), 0.0);
  onehot[static_cast<std::size_t>(channel)] = 1.0;
  return onehot;
}

double penalized_value(double gain, double cost, const RewardSpec& spec) {
  double g = gain;
  if (spec.mode == RewardMode::kFusion) {
    if (spec.fusion_weights.empty()) throw ConfigError("fusion mode needs fusion_weights");
    g = spec.fusion_weights[static_cast<std::size_t>(
        gain_class(gain, static_cast<int>(spec.fusion_weights.size())))];
  }
  return g - spec.penalty_strength * cost;
}

double compute_reward(double gain, double cost, const RewardSpec& spec, bool* clipped) {
  if (clipped != nullptr) *clipped = false;
  switch (spec.mode) {
    case RewardMode::kBinary:
      return gain;
    case RewardMode::kOnehot: {
      if (spec.classes <= 0) throw ConfigError("onehot reward needs a fitted class count");
      const long raw = std::lround(gain);
      const int cls = gain_class(gain, spec.classes);
      if (clipped != nullptr && (raw < 0 || raw >= spec.classes)) *clipped = true;
      return static_cast<double>(cls);
    }
    case RewardMode::kContinuous:
    case RewardMode::kFusion: {
      const double span = spec.norm_max - spec.norm_min;
      if (!(span > 0.0)) throw ConfigError("reward normalization range is empty");
      double v = (penalized_value(gain, cost, spec) - spec.norm_min) / span;
      if (v < 0.0 || v > 1.0) {
        if (clipped != nullptr) *clipped = true;
        v = std::clamp(v, 0.0, 1.0);
      }
      return v;
    }
  }
  throw ConfigError("invalid reward mode value");
}

void fit_reward_spec(RewardSpec& spec, const std::vector<const Journey*>& train_journeys) {
  if (spec.mode == RewardMode::kOnehot && spec.classes <= 0) {
    long max_class = 0;
    for (const Journey* j : train_journeys) {
      for (const Observation& obs : j->observations) {
        max_class = std::max(max_class, std::lround(obs.gain));
      }
    }
    spec.classes = static_cast<int>(max_class) + 1;
  }
  if (spec.needs_normalization()) {
    bool any = false;
    double lo = 0.0, hi = 0.0;
    for (const Journey* j : train_journeys) {
      for (const Observation& obs : j->observations) {
        const double v = penalized_value(obs.gain, obs.cost, spec);
        lo = any ? std::min(lo, v) : v;
        hi = any ? std::max(hi, v) : v;
        any = true;
      }
    }
    if (!any) {
      logging::warn("reward fit saw no training observations; using [0,1]");
      lo = 0.0;
      hi = 1.0;
    }
    if (!(hi - lo > 1e-12)) {
      logging::warn("degenerate reward range at " + std::to_string(lo) + "; widening by 1");
      hi = lo + 1.0;
    }
    spec.norm_min = lo;
    spec.norm_max = hi;
  }
  spec.fitted = true;
}

std::vector<std::pair<int, int>> window_spans(int T, int n, int stride, int min_len) {
  std::vector<std::pair<int, int>> spans;
  if (stride < 1) throw ConfigError("window stride must be positive");
  for (int start = 0; start < T; start += stride) {
    const int len = std::min(n, T - start);
    if (len == n) {
      spans.emplace_back(start, n);
    } else {
      if (len >= min_len) spans.emplace_back(start, len);
      break;  // later tails are suffixes of this one
    }
  }
  return spans;
}

namespace {

// per-observation labels once, so clips are counted once per observation
std::vector<double> observation_rewards(const Journey& journey, const RewardSpec& spec,
                                        std::size_t* clip_events) {
  std::vector<double> rewards(journey.observations.size());
  std::size_t clips = 0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    bool clipped = false;
    const Observation& obs = journey.observations[i];
    rewards[i] = compute_reward(obs.gain, obs.cost, spec, &clipped);
    if (clipped) ++clips;
  }
  if (clip_events != nullptr) *clip_events += clips;
  return rewards;
}

SequenceSample fuse_window(const Journey& journey, const std::vector<double>& rewards, int start,
                           int len, const PipelineConfig& config) {
  const RewardSpec& spec = config.reward;
  const int m = config.m;
  const int rw = spec.reward_width();
  const int n = config.n;
  SequenceSample s;
  s.user_id = journey.user_id;
  s.fused = num::Tensor({config.fused_width(), n});
  s.action_labels.assign(static_cast<std::size_t>(n), -1);
  s.reward_labels.assign(static_cast<std::size_t>(n), 0.0);
  s.valid_mask.assign(static_cast<std::size_t>(n), 0);
  const int pad = n - len;
  for (int j = 0; j < len; ++j) {
    const int i = start + j;
    const int col = pad + j;
    const Observation& obs = journey.observations[static_cast<std::size_t>(i)];
    if (i > 0) {
      const Observation& prev = journey.observations[static_cast<std::size_t>(i - 1)];
      s.fused.at(prev.channel, col) = 1.0;
      if (spec.mode == RewardMode::kOnehot) {
        s.fused.at(m + static_cast<int>(rewards[static_cast<std::size_t>(i - 1)]), col) = 1.0;
      } else {
        s.fused.at(m, col) = rewards[static_cast<std::size_t>(i - 1)];
      }
    }
    for (int k = 0; k < config.q_dim; ++k) {
      s.fused.at(m + rw + k, col) = obs.q[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < config.f_dim; ++k) {
      s.fused.at(m + rw + config.q_dim + k, col) = journey.f[static_cast<std::size_t>(k)];
    }
    s.action_labels[static_cast<std::size_t>(col)] = obs.channel;
    s.reward_labels[static_cast<std::size_t>(col)] = rewards[static_cast<std::size_t>(i)];
    s.valid_mask[static_cast<std::size_t>(col)] = 1;
  }
  return s;
}

}  // namespace

std::vector<SequenceSample> build_sequences(const Journey& journey, const PipelineConfig& config,
                                            std::size_t* clip_events) {
  if (!config.reward.fitted) throw ConfigError("build_sequences needs a fitted reward spec");
  if (config.n < 2) throw ConfigError("sequence length must be at least 2");
  const int T = static_cast<int>(journey.observations.size());
  const int stride = config.stride > 0 ? config.stride : config.n;
  const std::vector<double> rewards = observation_rewards(journey, config.reward, clip_events);

  std::vector<SequenceSample> samples;
  for (const auto& [start, len] : window_spans(T, config.n, stride, config.min_journey_len)) {
    samples.push_back(fuse_window(journey, rewards, start, len, config));
  }
  return samples;
}

SequenceSample tail_sample(const Journey& journey, const PipelineConfig& config) {
  if (!config.reward.fitted) throw ConfigError("tail_sample needs a fitted reward spec");
  if (config.n < 2) throw ConfigError("sequence length must be at least 2");
  const int T = static_cast<int>(journey.observations.size());
  if (T < 1) throw DataError("tail_sample needs at least one observation");
  if (static_cast<int>(journey.f.size()) != config.f_dim) {
    throw ShapeError("journey '" + journey.user_id + "' has " + std::to_string(journey.f.size()) +
                     " profile features, expected " + std::to_string(config.f_dim));
  }
  for (const Observation& obs : journey.observations) {
    if (static_cast<int>(obs.q.size()) != config.q_dim) {
      throw ShapeError("journey '" + journey.user_id + "' has a " + std::to_string(obs.q.size()) +
                       "-wide touch feature, expected " + std::to_string(config.q_dim));
    }
    if (obs.channel < 0 || obs.channel >= config.m) {
      throw DataError("journey '" + journey.user_id + "' uses channel " +
                      std::to_string(obs.channel) + ", outside [0, " + std::to_string(config.m) +
                      ")");
    }
  }
  const std::vector<double> rewards = observation_rewards(journey, config.reward, nullptr);
  const int len = std::min(T, config.n);
  return fuse_window(journey, rewards, T - len, len, config);
}

DatasetSplit split_dataset(std::vector<SequenceSample> samples, std::uint64_t seed) {
  if (samples.size() < 10) {
    throw DataError("need at least 10 samples to split, have " + std::to_string(samples.size()));
  }
  std::map<std::string, std::size_t> counts;
  for (const SequenceSample& s : samples) ++counts[s.user_id];
  std::vector<std::pair<std::string, std::size_t>> user_counts(counts.begin(), counts.end());
  const auto assignment = assign_splits(std::move(user_counts), seed, samples.size());
  DatasetSplit split;
  for (SequenceSample& s : samples) {
    switch (assignment.at(s.user_id)) {
      case 0: split.train.push_back(std::move(s)); break;
      case 1: split.validation.push_back(std::move(s)); break;
      default: split.test.push_back(std::move(s)); break;
    }
  }
  return split;
}

DatasetSplit build_dataset(const std::vector<Journey>& journeys, const PipelineConfig& config,
                           PipelineReport* report) {
  PipelineConfig cfg = config;
  PipelineReport rep;
  rep.journeys_total = journeys.size();

  if (cfg.q_dim < 0) {
    cfg.q_dim = 0;
    for (const Journey& j : journeys) {
      if (!j.observations.empty()) {
        cfg.q_dim = static_cast<int>(j.observations.front().q.size());
        break;
      }
    }
  }
  if (cfg.f_dim < 0) {
    cfg.f_dim = journeys.empty() ? 0 : static_cast<int>(journeys.front().f.size());
  }

  std::vector<Journey> kept;
  for (const Journey& j : journeys) {
    if (static_cast<int>(j.f.size()) != cfg.f_dim) {
      ++rep.journeys_discarded_dims;
      logging::debug("journey " + j.user_id + " dropped: profile feature length " +
                     std::to_string(j.f.size()));
      continue;
    }
    Journey filtered;
    filtered.user_id = j.user_id;
    filtered.f = j.f;
    for (const Observation& obs : j.observations) {
      const bool ok = static_cast<int>(obs.q.size()) == cfg.q_dim && obs.channel >= 0 &&
                      obs.channel < cfg.m && obs.cost >= 0.0;
      if (ok) {
        filtered.observations.push_back(obs);
      } else {
        ++rep.observations_dropped;
      }
    }
    if (static_cast<int>(filtered.observations.size()) < cfg.min_journey_len) {
      ++rep.journeys_discarded_short;
      continue;
    }
    kept.push_back(std::move(filtered));
  }

  const int stride = cfg.stride > 0 ? cfg.stride : cfg.n;
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  std::vector<std::size_t> per_journey(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto spans = window_spans(static_cast<int>(kept[i].observations.size()), cfg.n, stride,
                                    cfg.min_journey_len);
    per_journey[i] = spans.size();
    counts[kept[i].user_id] += spans.size();
    total += spans.size();
  }
  if (total < 10) {
    throw DataError("pipeline produced " + std::to_string(total) + " samples; need at least 10");
  }

  std::vector<std::pair<std::string, std::size_t>> user_counts(counts.begin(), counts.end());
  const auto assignment = assign_splits(std::move(user_counts), cfg.split_seed, total);

  std::vector<const Journey*> train_journeys;
  for (const Journey& j : kept) {
    if (assignment.at(j.user_id) == 0) train_journeys.push_back(&j);
  }
  if (!cfg.reward.fitted) fit_reward_spec(cfg.reward, train_journeys);

  DatasetSplit split;
  for (const Journey& j : kept) {
    auto samples = build_sequences(j, cfg, &rep.clip_events);
    auto* dest = &split.test;
    switch (assignment.at(j.user_id)) {
      case 0: dest = &split.train; break;
      case 1: dest = &split.validation; break;
      default: break;
    }
    for (SequenceSample& s : samples) dest->push_back(std::move(s));
  }

  rep.samples_total = total;
  rep.q_dim = cfg.q_dim;
  rep.f_dim = cfg.f_dim;
  rep.fitted_reward = cfg.reward;
  if (report != nullptr) {
    rep.journeys_parse = report->journeys_parse;
    rep.profiles_parse = report->profiles_parse;
    *report = rep;
  }
  return split;
}

}  // namespace mtorl::data
