#include "mtorl/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace mtorl::num {

GradCheckResult grad_check(const LossFn& loss_fn, const ParamMap& params, double eps,
                           int max_entries_per_tensor, std::uint64_t sample_seed) {
  GradCheckResult result;
  ParamMap analytic;
  loss_fn(params, &analytic);

  for (const auto& [name, g] : analytic) {
    for (int i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        result.finite = false;
        result.nonfinite_param = name;
        return result;
      }
    }
  }

  std::mt19937_64 rng(sample_seed);
  ParamMap work = params;
  for (const auto& [name, p] : params) {
    std::vector<int> indices(static_cast<size_t>(p.size()));
    std::iota(indices.begin(), indices.end(), 0);
    if (max_entries_per_tensor >= 0 && p.size() > max_entries_per_tensor) {
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(static_cast<size_t>(max_entries_per_tensor));
    }
    Tensor& slot = work.at(name);
    const Tensor& ga = analytic.at(name);
    for (int idx : indices) {
      const double orig = slot[idx];
      slot[idx] = orig + eps;
      const double lp = loss_fn(work, nullptr);
      slot[idx] = orig - eps;
      const double lm = loss_fn(work, nullptr);
      slot[idx] = orig;
      const double numeric = (lp - lm) / (2.0 * eps);
      const double a = ga[idx];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = name;
        result.worst_index = idx;
      }
    }
  }
  return result;
}

}  // namespace mtorl::num
