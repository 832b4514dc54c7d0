#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtorl/data/dataset.hpp"
#include "mtorl/model/config.hpp"
#include "mtorl/model/network.hpp"
#include "mtorl/train/losses.hpp"
#include "mtorl/train/metrics.hpp"

namespace mtorl::train {

struct TrainConfig {
  double lr = 0.001;
  int batch_size = 512;
  int max_epochs = 800;
  // Early stopping on validation F1: stop after this many epochs without
  // improvement and return the best snapshot. 0 disables.
  int patience = 20;
  LossWeights weights;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;  // init, shuffling, pairing, dropout
  std::string history_path;  // per-epoch CSV, empty = skip
  bool micro_metrics = false;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double policy_loss = 0.0;
  double reward_loss = 0.0;
  double dpo_loss = 0.0;
  double total = 0.0;
  // NaN when there is no validation split
  double val_f1 = 0.0;
  double val_precision = 0.0;
  double val_recall = 0.0;
};

struct TrainResult {
  model::ModelParams params;  // best validation snapshot, else final
  std::vector<EpochStats> history;
  int best_epoch = -1;  // 1-based, -1 when validation never ran
  double best_val_f1 = 0.0;
  bool early_stopped = false;
};

// Full optimization loop: minibatch Adam over the combined objective with
// per-epoch validation. Deterministic for a fixed config and data.
// Throws TrainError with the epoch and batch index if a loss turns
// non-finite.
TrainResult fit(const std::vector<data::SequenceSample>& train,
                const std::vector<data::SequenceSample>& validation,
                const model::ModelConfig& model_config, const TrainConfig& train_config);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace mtorl::train
