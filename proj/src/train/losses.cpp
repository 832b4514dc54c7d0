#include "mtorl/train/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtorl/common/errors.hpp"
#include "mtorl/common/log.hpp"

namespace mtorl::train {

void LossWeights::validate() const {
  if (!std::isfinite(mu) || mu < 0.0) throw ConfigError("loss weight mu must be finite and >= 0");
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ConfigError("loss weight lambda must be finite and >= 0");
  }
  if (!std::isfinite(beta) || beta <= 0.0) throw ConfigError("beta must be finite and > 0");
}

double total_reward(const data::SequenceSample& sample) {
  double total = 0.0;
  for (size_t t = 0; t < sample.reward_labels.size(); ++t) {
    if (sample.valid_mask[t]) total += sample.reward_labels[t];
  }
  return total;
}

std::vector<std::pair<int, int>> build_preference_pairs(
    const std::vector<const data::SequenceSample*>& batch, Rng& rng) {
  const int b = static_cast<int>(batch.size());
  if (b < 2) return {};
  std::vector<double> totals(static_cast<size_t>(b));
  for (int i = 0; i < b; ++i) totals[static_cast<size_t>(i)] = total_reward(*batch[static_cast<size_t>(i)]);

  std::vector<int> order(static_cast<size_t>(b));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&totals](int x, int y) {
    return totals[static_cast<size_t>(x)] > totals[static_cast<size_t>(y)];
  });

  const int half = b / 2;
  std::vector<int> bottom(order.begin() + (b - half), order.end());
  rng.shuffle(bottom);

  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < half; ++j) {
    const int w = order[static_cast<size_t>(j)];
    const int l = bottom[static_cast<size_t>(j)];
    if (totals[static_cast<size_t>(w)] > totals[static_cast<size_t>(l)]) pairs.emplace_back(w, l);
  }
  return pairs;
}

namespace {

int count_valid(const std::vector<std::uint8_t>& mask) {
  int count = 0;
  for (std::uint8_t v : mask) count += v != 0;
  return count;
}

// -1 at padded steps so the gather skips them entirely
std::vector<int> class_labels(const data::SequenceSample& sample) {
  std::vector<int> labels(sample.reward_labels.size(), -1);
  for (size_t t = 0; t < sample.reward_labels.size(); ++t) {
    if (sample.valid_mask[t]) labels[t] = static_cast<int>(std::llround(sample.reward_labels[t]));
  }
  return labels;
}

}  // namespace

BatchLosses build_batch_losses(num::Tape& tape, const std::map<std::string, num::VarId>& param_ids,
                               const model::ModelConfig& config,
                               const std::vector<const data::SequenceSample*>& batch,
                               const std::vector<std::pair<int, int>>& pairs,
                               const LossWeights& weights, bool training, Rng* dropout_rng) {
  weights.validate();
  if (batch.empty()) throw DataError("loss construction needs a non-empty batch");

  BatchLosses out;
  std::vector<model::ForwardOutput> forwards;
  forwards.reserve(batch.size());
  for (const data::SequenceSample* sample : batch) {
    forwards.push_back(model::forward(tape, param_ids, config, *sample, training, dropout_rng));
    out.valid_steps += count_valid(sample->valid_mask);
  }

  const num::VarId zero = tape.constant(num::Tensor({1}));

  num::VarId log_prob_sum = zero;
  num::VarId reward_term_sum = zero;
  bool reward_is_log = config.reward_head == model::RewardHead::kSoftmax;
  for (size_t i = 0; i < batch.size(); ++i) {
    const data::SequenceSample& s = *batch[i];
    num::VarId gathered = num::row_gather_log(tape, forwards[i].action_probs, s.action_labels);
    log_prob_sum = num::add(tape, log_prob_sum, num::masked_sum(tape, gathered, s.valid_mask));

    num::VarId terms;
    switch (config.reward_head) {
      case model::RewardHead::kSigmoid:
        terms = num::bce_terms(tape, forwards[i].reward_preds, s.reward_labels);
        break;
      case model::RewardHead::kBounded:
        terms = num::squared_error_terms(tape, forwards[i].reward_preds, s.reward_labels);
        break;
      case model::RewardHead::kSoftmax:
        terms = num::row_gather_log(tape, forwards[i].reward_preds, class_labels(s));
        break;
      default:
        throw ConfigError("invalid reward head value");
    }
    reward_term_sum = num::add(tape, reward_term_sum, num::masked_sum(tape, terms, s.valid_mask));
  }

  if (out.valid_steps > 0) {
    out.policy = num::scale(tape, log_prob_sum, -1.0 / out.valid_steps);
    out.reward = num::scale(tape, reward_term_sum,
                            (reward_is_log ? -1.0 : 1.0) / out.valid_steps);
  } else {
    out.policy = zero;
    out.reward = zero;
  }

  num::VarId dpo_sum = zero;
  for (const auto& [w, l] : pairs) {
    const data::SequenceSample& sw = *batch[static_cast<size_t>(w)];
    const data::SequenceSample& sl = *batch[static_cast<size_t>(l)];
    std::vector<std::uint8_t> both(sw.valid_mask.size());
    for (size_t t = 0; t < both.size(); ++t) both[t] = sw.valid_mask[t] && sl.valid_mask[t];
    const int cells = count_valid(both);
    if (cells == 0) continue;
    out.pair_cells += cells;

    num::VarId lw =
        num::row_gather_log(tape, forwards[static_cast<size_t>(w)].action_probs, sw.action_labels);
    num::VarId ll =
        num::row_gather_log(tape, forwards[static_cast<size_t>(l)].action_probs, sl.action_labels);
    num::VarId margin = num::scale(tape, num::sub(tape, lw, ll), weights.beta);
    dpo_sum = num::add(tape, dpo_sum, num::masked_sum(tape, num::log_sigmoid(tape, margin), both));
  }
  if (out.pair_cells > 0) {
    out.dpo = num::scale(tape, dpo_sum, -1.0 / out.pair_cells);
  } else {
    out.dpo = zero;
    out.dpo_empty = true;
    if (weights.lambda > 0.0) {
      logging::warn("no usable preference pair in this batch; preference loss is 0");
    }
  }

  out.total = num::add(
      tape, out.policy,
      num::add(tape, num::scale(tape, out.reward, weights.mu), num::scale(tape, out.dpo, weights.lambda)));
  return out;
}

}  // namespace mtorl::train
