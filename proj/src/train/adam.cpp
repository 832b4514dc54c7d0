#include "mtorl/train/adam.hpp"

#include <cmath>

#include "mtorl/common/errors.hpp"

namespace mtorl::train {

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be finite and >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (eps <= 0.0) throw ConfigError("adam eps must be positive");
}

void Adam::step(std::map<std::string, num::Tensor>& params,
                const std::map<std::string, num::Tensor>& grads) {
  ++t_;
  const double correct1 = 1.0 - std::pow(beta1_, t_);
  const double correct2 = 1.0 - std::pow(beta2_, t_);
  for (auto& [name, value] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) throw ConfigError("missing gradient for parameter '" + name + "'");
    const num::Tensor& g = git->second;
    if (!g.same_shape(value)) {
      throw ShapeError("gradient shape mismatch for parameter '" + name + "'");
    }
    num::Tensor& m = m_.try_emplace(name, value.zeros_like()).first->second;
    num::Tensor& v = v_.try_emplace(name, value.zeros_like()).first->second;
    for (int i = 0; i < value.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / correct1;
      const double vhat = v[i] / correct2;
      value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace mtorl::train
