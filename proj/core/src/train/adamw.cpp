#include "ctrtab/train/adamw.hpp"

#include <cmath>
#include <string>

#include "ctrtab/error.hpp"

namespace ctrtab::train {

void AdamWConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("adamw: lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adamw: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adamw: eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("adamw: weight_decay must be non-negative");
}

AdamWState AdamWState::for_params(const AdamWConfig& config, std::span<nd::Tensor* const> params) {
  config.validate();
  AdamWState s;
  s.config = config;
  for (const nd::Tensor* p : params) {
    s.m.emplace_back(p->shape());
    s.v.emplace_back(p->shape());
  }
  return s;
}

void adamw_step(std::span<nd::Tensor* const> params, std::span<const nd::Tensor> grads, AdamWState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw DimensionError("adamw_step: " + std::to_string(params.size()) + " params, " + std::to_string(grads.size()) +
                         " grads, " + std::to_string(state.m.size()) + " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i].shape() || params[i]->shape() != state.m[i].shape()) {
      throw DimensionError("adamw_step: shape mismatch for parameter " + std::to_string(i) + ": " +
                           nd::to_string(params[i]->shape()) + " vs grad " + nd::to_string(grads[i].shape()));
    }
    if (!nd::all_finite(grads[i])) {
      throw TrainingAbort("non-finite gradient for parameter " + std::to_string(i) + " at step " +
                          std::to_string(state.step + 1));
    }
  }
  const auto& c = state.config;
  const std::size_t k = ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(k));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(k));
  const double decay = 1.0 - c.lr * c.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    const auto g = grads[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] = p[j] * decay - c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

}  // namespace ctrtab::train
