#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "mtorl/numerics/tensor.hpp"

namespace mtorl::num {

using ParamMap = std::map<std::string, Tensor>;

// Loss evaluated at a parameter setting. When grads_out is non-null the
// callee must also fill it with d(loss)/d(param) for every parameter.
using LossFn = std::function<double(const ParamMap&, ParamMap* grads_out)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  int worst_index = -1;
  bool finite = true;           // analytic gradients were all finite
  std::string nonfinite_param;  // first offender when finite is false
};

// Central-difference check of analytic gradients. Relative error per entry
// is |a - n| / max(|a|, |n|, 1e-8). max_entries_per_tensor < 0 checks every
// entry; otherwise a deterministic sample of that size is drawn per tensor
// with sample_seed.
GradCheckResult grad_check(const LossFn& loss_fn, const ParamMap& params, double eps,
                           int max_entries_per_tensor = -1, std::uint64_t sample_seed = 0);

}  // namespace mtorl::num
