#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtorl/data/journey.hpp"
#include "mtorl/numerics/tensor.hpp"

namespace mtorl::data {

enum class RewardMode { kBinary, kContinuous, kFusion, kOnehot };

RewardMode reward_mode_from_string(const std::string& name);
std::string to_string(RewardMode mode);

// How gains and costs become reward labels and how the previous reward is
// embedded into the fused input.
struct RewardSpec {
  RewardMode mode = RewardMode::kBinary;
  std::vector<double> fusion_weights = {0.0, 1.0, 10.0};  // indexed by gain class
  double penalty_strength = 0.5;
  int classes = 0;  // gain classes for onehot mode; 0 = infer while fitting
  double norm_min = 0.0;
  double norm_max = 1.0;
  bool fitted = false;

  // Width of the embedded reward inside a fused input column.
  int reward_width() const { return mode == RewardMode::kOnehot ? classes : 1; }
  bool needs_normalization() const {
    return mode == RewardMode::kContinuous || mode == RewardMode::kFusion;
  }
};

// Fixed-length model input window. Column t is
// concat(onehot(prev action), embed(prev reward), q_t, f); the prev slots
// hold the true preceding observation, zeros only at the journey start.
// Padded columns sit on the left, all-zero, with valid_mask false.
struct SequenceSample {
  std::string user_id;
  num::Tensor fused;                    // [F x n]
  std::vector<int> action_labels;      // -1 at padded steps
  std::vector<double> reward_labels;   // class index in onehot mode
  std::vector<std::uint8_t> valid_mask;
};

struct DatasetSplit {
  std::vector<SequenceSample> train;
  std::vector<SequenceSample> validation;
  std::vector<SequenceSample> test;
};

struct PipelineConfig {
  int m = 2;              // channel count
  int n = 20;             // window length
  int q_dim = -1;         // -1 = infer from the first kept observation
  int f_dim = -1;         // -1 = infer from the first journey
  int min_journey_len = 10;
  int stride = 0;         // window stride; 0 = n (non-overlapping)
  RewardSpec reward;
  std::uint64_t split_seed = 0;

  int fused_width() const;  // m + reward width + q_dim + f_dim
};

struct PipelineReport {
  ParseStats journeys_parse;
  ParseStats profiles_parse;
  std::size_t journeys_total = 0;
  std::size_t journeys_discarded_short = 0;
  std::size_t journeys_discarded_dims = 0;  // profile feature length mismatch
  std::size_t observations_dropped = 0;     // per-record dimension/channel rejects
  std::size_t clip_events = 0;              // normalized rewards clipped into [0,1]
  std::size_t samples_total = 0;
  int q_dim = 0;
  int f_dim = 0;
  RewardSpec fitted_reward;
};

// state = concat(q, f)
std::vector<double> build_state(const Observation& obs, const std::vector<double>& f);

// One-hot over m channels; throws DataError when channel is out of range.
std::vector<double> encode_action(int channel, int m);

// Penalized pre-normalization value g' - s*w (fusion maps the gain class
// through fusion_weights first). Not meaningful for binary/onehot modes.
double penalized_value(double gain, double cost, const RewardSpec& spec);

// Reward label for one observation. Continuous/fusion values are min-max
// normalized with the fitted range and clipped to [0,1] (sets *clipped).
// Onehot returns the gain class clamped into [0, classes).
double compute_reward(double gain, double cost, const RewardSpec& spec, bool* clipped = nullptr);

// Fits norm_min/norm_max (continuous/fusion) or the class count (onehot)
// over every observation of the given training journeys.
void fit_reward_spec(RewardSpec& spec, const std::vector<const Journey*>& train_journeys);

// Window starts and lengths for a journey of T observations: full windows
// at stride steps, then the first short tail iff it still meets min_len.
std::vector<std::pair<int, int>> window_spans(int T, int n, int stride, int min_len);

// Windows one journey into samples. The journey must already satisfy the
// pipeline's dimension and length requirements; spec must be fitted.
std::vector<SequenceSample> build_sequences(const Journey& journey, const PipelineConfig& config,
                                            std::size_t* clip_events = nullptr);

// Single inference window over the last min(T, n) observations, fused the
// same way as build_sequences and left-padded. The preceding observation
// feeding the first column comes from before the window when one exists.
// Needs at least one observation; checks feature dimensions.
SequenceSample tail_sample(const Journey& journey, const PipelineConfig& config);

// Deterministic user-grouped 0.8/0.1/0.1 partition by sample count.
// Requires at least 10 samples; no user's samples straddle splits.
DatasetSplit split_dataset(std::vector<SequenceSample> samples, std::uint64_t seed);

// Full pipeline: filter journeys and records, split users, fit the reward
// spec on the training users only, window every journey. The fitted spec
// and all counts land in the report.
DatasetSplit build_dataset(const std::vector<Journey>& journeys, const PipelineConfig& config,
                           PipelineReport* report = nullptr);

}  // namespace mtorl::data
