#pragma once

#include <vector>

#include "mtorl/data/dataset.hpp"
#include "mtorl/model/network.hpp"

namespace mtorl::train {

struct EvalReport {
  double f1 = 0.0;         // harmonic mean of the averaged precision/recall
  double precision = 0.0;  // macro by default, micro on request
  double recall = 0.0;
  // Accuracy for sigmoid (threshold 0.5) and softmax (argmax) reward
  // heads, mean squared error for the bounded head.
  double reward_metric = 0.0;
  int valid_steps = 0;
  int channels_missing = 0;  // channels with no ground-truth occurrences
};

// Per-channel confusion counts from argmax predictions at valid steps.
struct Confusion {
  std::vector<long long> tp, fp, fn;
};

// Precision/recall/F1 from confusion counts. Macro averaging skips
// channels absent from the ground truth (tp + fn == 0) and counts them;
// a present channel that was never predicted scores precision 0.
EvalReport metrics_from_confusion(const Confusion& confusion, bool micro = false);

// Deterministic evaluation: argmax actions against logged labels at every
// valid step, plus the reward metric for the model's reward head.
EvalReport evaluate(const model::ModelParams& params, const model::ModelConfig& config,
                    const std::vector<data::SequenceSample>& samples, bool micro = false);

}  // namespace mtorl::train
