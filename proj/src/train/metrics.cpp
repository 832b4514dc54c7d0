#include "mtorl/train/metrics.hpp"

#include <cmath>

#include "mtorl/common/errors.hpp"
#include "mtorl/numerics/tape.hpp"

namespace mtorl::train {

EvalReport metrics_from_confusion(const Confusion& confusion, bool micro) {
  const size_t m = confusion.tp.size();
  if (confusion.fp.size() != m || confusion.fn.size() != m) {
    throw ShapeError("confusion count vectors must share one length");
  }
  EvalReport report;
  if (micro) {
    long long tp = 0, fp = 0, fn = 0;
    for (size_t c = 0; c < m; ++c) {
      tp += confusion.tp[c];
      fp += confusion.fp[c];
      fn += confusion.fn[c];
      if (confusion.tp[c] + confusion.fn[c] == 0) ++report.channels_missing;
    }
    report.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    report.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  } else {
    double precision_sum = 0.0, recall_sum = 0.0;
    int included = 0;
    for (size_t c = 0; c < m; ++c) {
      const long long tp = confusion.tp[c], fp = confusion.fp[c], fn = confusion.fn[c];
      if (tp + fn == 0) {
        ++report.channels_missing;
        continue;
      }
      ++included;
      precision_sum += tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
      recall_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (included > 0) {
      report.precision = precision_sum / included;
      report.recall = recall_sum / included;
    }
  }
  const double pr = report.precision + report.recall;
  report.f1 = pr > 0.0 ? 2.0 * report.precision * report.recall / pr : 0.0;
  return report;
}

EvalReport evaluate(const model::ModelParams& params, const model::ModelConfig& config,
                    const std::vector<data::SequenceSample>& samples, bool micro) {
  validate_params(config, params);
  Confusion confusion;
  confusion.tp.assign(static_cast<size_t>(config.m), 0);
  confusion.fp.assign(static_cast<size_t>(config.m), 0);
  confusion.fn.assign(static_cast<size_t>(config.m), 0);

  double reward_accum = 0.0;
  int steps = 0;
  for (const data::SequenceSample& sample : samples) {
    num::Tape tape;
    auto ids = model::bind_params(tape, params, false);
    model::ForwardOutput out = model::forward(tape, ids, config, sample);
    const num::Tensor& probs = tape.val(out.action_probs);
    const num::Tensor& rhat = tape.val(out.reward_preds);

    for (int t = 0; t < config.n; ++t) {
      if (!sample.valid_mask[static_cast<size_t>(t)]) continue;
      ++steps;
      const int label = sample.action_labels[static_cast<size_t>(t)];
      const int predicted =
          model::select_action(probs.data() + static_cast<size_t>(t) * config.m, config.m,
                               model::ActionSelect::kDeterministic);
      if (predicted == label) {
        ++confusion.tp[static_cast<size_t>(label)];
      } else {
        ++confusion.fp[static_cast<size_t>(predicted)];
        ++confusion.fn[static_cast<size_t>(label)];
      }

      const double reward_label = sample.reward_labels[static_cast<size_t>(t)];
      switch (config.reward_head) {
        case model::RewardHead::kSigmoid: {
          const double thresholded = rhat[t] >= 0.5 ? 1.0 : 0.0;
          reward_accum += thresholded == reward_label ? 1.0 : 0.0;
          break;
        }
        case model::RewardHead::kBounded: {
          const double diff = rhat[t] - reward_label;
          reward_accum += diff * diff;
          break;
        }
        case model::RewardHead::kSoftmax: {
          const int klass =
              model::select_action(rhat.data() + static_cast<size_t>(t) * config.reward_dim,
                                   config.reward_dim, model::ActionSelect::kDeterministic);
          reward_accum += klass == static_cast<int>(std::llround(reward_label)) ? 1.0 : 0.0;
          break;
        }
      }
    }
  }
  if (steps == 0) throw DataError("evaluation needs at least one valid step");

  EvalReport report = metrics_from_confusion(confusion, micro);
  report.valid_steps = steps;
  report.reward_metric = reward_accum / steps;
  return report;
}

}  // namespace mtorl::train
