#pragma once

#include <map>
#include <string>

#include "mtorl/numerics/tensor.hpp"

namespace mtorl::train {

// Adam with bias correction. Moment state is keyed by parameter name and
// created on the first step, so the same instance must only ever see one
// parameter set.
class Adam {
 public:
  Adam(double lr = 0.001, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::map<std::string, num::Tensor>& params,
            const std::map<std::string, num::Tensor>& grads);

  int steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::map<std::string, num::Tensor> m_, v_;
};

}  // namespace mtorl::train
