#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::train {

struct AdamWConfig {
  double lr = 0.0018;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;

  void validate() const;
  friend bool operator==(const AdamWConfig&, const AdamWConfig&) = default;
};

struct AdamWState {
  AdamWConfig config;
  std::vector<nd::Tensor> m;
  std::vector<nd::Tensor> v;
  std::size_t step = 0;

  static AdamWState for_params(const AdamWConfig& config, std::span<nd::Tensor* const> params);
};

// p <- p (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps), bias-corrected moments.
// Throws DimensionError on misaligned inputs and TrainingAbort on a
// non-finite gradient (parameters are left untouched in that case).
void adamw_step(std::span<nd::Tensor* const> params, std::span<const nd::Tensor> grads, AdamWState& state);

}  // namespace ctrtab::train
