#pragma once

#include <map>
#include <string>
#include <vector>

namespace mtorl::alloc {

// Distribution over the m channels. Entries are nonnegative and sum to one
// within 1e-9.
struct ChannelPolicy {
  std::vector<double> probs;

  void validate() const;
};

// Per-channel exposure accounting collected from a journey log. positives
// counts exposures whose observed gain was positive, predicted_positives
// counts exposures whose predicted reward cleared the threshold.
struct ChannelStats {
  std::vector<long long> exposures;
  std::vector<long long> positives;
  std::vector<long long> predicted_positives;

  int channels() const { return static_cast<int>(exposures.size()); }
  void validate() const;
};

struct RankedUser {
  std::string user_id;
  double score = 0.0;
};

// Non-increasing by score, ties broken by ascending user id.
using UserRanking = std::vector<RankedUser>;

// Folds parallel per-exposure arrays into counts. channels[i] names the
// acting channel of exposure i, gains[i] > 0 marks an observed positive.
// preds supplies the predicted reward per exposure and may be null when no
// model output is available (predicted_positives stays zero then).
ChannelStats accumulate_stats(int m, const std::vector<int>& channels,
                              const std::vector<double>& gains,
                              const std::vector<double>* preds, double tau);

// Channel weight proportional to observed positive rate. Channels without
// exposures weigh zero; an all-zero weight vector degenerates to uniform
// with a warning.
ChannelPolicy explicit_policy(const ChannelStats& stats);

// Same normalization over rates of threshold-clearing predictions.
ChannelPolicy implicit_policy(const ChannelStats& stats);

// Convenience overload: preds_by_channel[j] holds the predicted rewards of
// channel j's exposures.
ChannelPolicy implicit_policy(const std::vector<std::vector<double>>& preds_by_channel,
                              double tau);

// Convex combination (1 - alpha) * lhs + alpha * rhs, alpha in [0, 1].
ChannelPolicy merge_policies(const ChannelPolicy& lhs, const ChannelPolicy& rhs, double alpha);

// Top n users by score. Returns everyone when the memory holds fewer than n.
UserRanking rank_users(const std::map<std::string, double>& reward_memory, int n);

}  // namespace mtorl::alloc
