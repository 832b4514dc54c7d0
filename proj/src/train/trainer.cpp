#include "mtorl/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "mtorl/common/errors.hpp"
#include "mtorl/common/log.hpp"
#include "mtorl/numerics/tape.hpp"
#include "mtorl/train/adam.hpp"

namespace mtorl::train {

namespace {

constexpr const char* kHistoryHeader =
    "epoch,policy_loss,reward_loss,dpo_loss,total,val_f1,val_precision,val_recall";

std::string format_row(const EpochStats& s) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", s.epoch,
                s.policy_loss, s.reward_loss, s.dpo_loss, s.total, s.val_f1, s.val_precision,
                s.val_recall);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (!std::isfinite(lr) || lr < 0.0) throw ConfigError("learning rate must be finite and >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max epochs must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  weights.validate();
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << kHistoryHeader << '\n';
  for (const EpochStats& s : history) out << format_row(s) << '\n';
  if (!out.flush()) throw DataError("failed writing history to '" + path + "'");
}

TrainResult fit(const std::vector<data::SequenceSample>& train,
                const std::vector<data::SequenceSample>& validation,
                const model::ModelConfig& model_config, const TrainConfig& train_config) {
  train_config.validate();
  model_config.validate();
  if (train.empty()) throw DataError("training split is empty");

  const bool has_val = !validation.empty();
  if (!has_val && train_config.patience > 0) {
    logging::warn("no validation split; early stopping disabled");
  }

  Rng rng(train_config.seed);
  TrainResult result;
  result.params = model::init_params(model_config, train_config.seed);
  Adam adam(train_config.lr, train_config.adam_beta1, train_config.adam_beta2,
            train_config.adam_eps);

  std::ofstream history_out;
  if (!train_config.history_path.empty()) {
    history_out.open(train_config.history_path, std::ios::trunc);
    if (!history_out) {
      throw DataError("cannot open '" + train_config.history_path + "' for writing");
    }
    history_out << kHistoryHeader << '\n';
  }

  model::ModelParams best;
  int epochs_since_best = 0;

  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= train_config.max_epochs; ++epoch) {
    rng.shuffle(order);

    double policy_sum = 0.0, reward_sum = 0.0, dpo_sum = 0.0;
    long long cells = 0, pair_cells = 0;
    int batch_index = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(train_config.batch_size), ++batch_index) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(train_config.batch_size));
      std::vector<const data::SequenceSample*> batch;
      batch.reserve(stop - start);
      for (size_t i = start; i < stop; ++i) batch.push_back(&train[static_cast<size_t>(order[i])]);

      std::vector<std::pair<int, int>> pairs;
      if (train_config.weights.lambda > 0.0) pairs = build_preference_pairs(batch, rng);

      num::Tape tape;
      auto ids = model::bind_params(tape, result.params, true);
      BatchLosses losses = build_batch_losses(tape, ids, model_config, batch, pairs,
                                              train_config.weights, true, &rng);
      const double total = tape.val(losses.total)[0];
      if (!std::isfinite(total)) {
        throw TrainError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(batch_index));
      }
      tape.backward(losses.total);
      adam.step(result.params.tensors, tape.param_gradients());

      policy_sum += tape.val(losses.policy)[0] * losses.valid_steps;
      reward_sum += tape.val(losses.reward)[0] * losses.valid_steps;
      dpo_sum += tape.val(losses.dpo)[0] * losses.pair_cells;
      cells += losses.valid_steps;
      pair_cells += losses.pair_cells;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.policy_loss = cells > 0 ? policy_sum / static_cast<double>(cells) : 0.0;
    stats.reward_loss = cells > 0 ? reward_sum / static_cast<double>(cells) : 0.0;
    stats.dpo_loss = pair_cells > 0 ? dpo_sum / static_cast<double>(pair_cells) : 0.0;
    stats.total = stats.policy_loss + train_config.weights.mu * stats.reward_loss +
                  train_config.weights.lambda * stats.dpo_loss;

    if (has_val) {
      EvalReport report =
          evaluate(result.params, model_config, validation, train_config.micro_metrics);
      stats.val_f1 = report.f1;
      stats.val_precision = report.precision;
      stats.val_recall = report.recall;
    } else {
      stats.val_f1 = std::numeric_limits<double>::quiet_NaN();
      stats.val_precision = stats.val_f1;
      stats.val_recall = stats.val_f1;
    }
    result.history.push_back(stats);
    if (history_out.is_open()) history_out << format_row(stats) << '\n' << std::flush;

    if (has_val) {
      if (result.best_epoch < 0 || stats.val_f1 > result.best_val_f1) {
        result.best_epoch = epoch;
        result.best_val_f1 = stats.val_f1;
        best = result.params;
        epochs_since_best = 0;
      } else {
        ++epochs_since_best;
      }
      if (train_config.patience > 0 && epochs_since_best >= train_config.patience) {
        result.early_stopped = true;
        logging::info("early stop at epoch " + std::to_string(epoch) + ", best epoch " +
                      std::to_string(result.best_epoch));
        break;
      }
    }
  }

  if (result.best_epoch > 0) result.params = std::move(best);
  return result;
}

}  // namespace mtorl::train
