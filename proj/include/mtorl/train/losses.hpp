#pragma once

#include <utility>
#include <vector>

#include "mtorl/common/rng.hpp"
#include "mtorl/data/dataset.hpp"
#include "mtorl/model/network.hpp"
#include "mtorl/numerics/tape.hpp"

namespace mtorl::train {

struct LossWeights {
  double mu = 0.08;     // reward auxiliary weight
  double lambda = 1.4;  // preference (DPO) weight
  double beta = 0.1;    // preference temperature

  void validate() const;  // finite, mu/lambda >= 0, beta > 0
};

// Winner/loser index pairs into a batch. Samples are ranked by the sum of
// their valid-step reward labels; the top half is paired with a uniformly
// shuffled bottom half and exact ties are discarded, so every surviving
// pair satisfies the strict inequality total(winner) > total(loser).
std::vector<std::pair<int, int>> build_preference_pairs(
    const std::vector<const data::SequenceSample*>& batch, Rng& rng);

// Sum of reward labels over valid steps.
double total_reward(const data::SequenceSample& sample);

// Scalar loss nodes for one batch, all pooled means over valid cells.
// A component with no cells (no pairs, weight zero) is a zero constant.
struct BatchLosses {
  num::VarId policy;
  num::VarId reward;
  num::VarId dpo;
  num::VarId total;  // policy + mu * reward + lambda * dpo
  int valid_steps = 0;
  int pair_cells = 0;
  bool dpo_empty = false;  // lambda > 0 but no usable pair survived
};

// Runs the forward pass for every sample on the given tape and assembles
// the combined objective. The reward-loss variant follows the model's
// reward head: sigmoid -> BCE, bounded -> MSE, softmax -> CE. Pairs index
// into batch; pass an empty list to disable the preference term.
BatchLosses build_batch_losses(num::Tape& tape, const std::map<std::string, num::VarId>& param_ids,
                               const model::ModelConfig& config,
                               const std::vector<const data::SequenceSample*>& batch,
                               const std::vector<std::pair<int, int>>& pairs,
                               const LossWeights& weights, bool training = false,
                               Rng* dropout_rng = nullptr);

}  // namespace mtorl::train
