#pragma once

#include "ctrtab/diffusion/schedule.hpp"
#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::diffusion {

// Reverse-step noise scale: sqrt of the true posterior variance (default) or
// sqrt(beta_t).
enum class SigmaKind { posterior, beta };

double reverse_sigma(const DdpmSchedule& schedule, std::size_t t, SigmaKind kind);

// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps
nd::Tensor forward_sample(const nd::Tensor& x0, std::size_t t, const DdpmSchedule& schedule, const nd::Tensor& eps);

struct Posterior {
  nd::Tensor mean;
  double variance = 0.0;
  double coef_x0 = 0.0;
  double coef_xt = 0.0;
};

// Gaussian q(x_{t-1} | x_t, x0).
Posterior posterior_params(const nd::Tensor& x0, const nd::Tensor& x_t, std::size_t t, const DdpmSchedule& schedule);

// x_{t-1} = (x_t - (1 - alpha_t) / sqrt(1 - alpha_bar_t) eps_hat) / sqrt(alpha_t) + sigma_t z.
// z is ignored at t = 1.
nd::Tensor ddpm_reverse_step(const nd::Tensor& x_t, std::size_t t, const nd::Tensor& eps_hat,
                             const DdpmSchedule& schedule, const nd::Tensor& z,
                             SigmaKind sigma = SigmaKind::posterior);

// x_t = x0 + sigma(t) eps, t in [0, 1].
nd::Tensor ve_perturb(const nd::Tensor& x0, double t, const VeSchedule& schedule, const nd::Tensor& eps);

// One Euler-Maruyama step of the reverse VE SDE from t to t - dt, with the
// score approximated by -eps_hat / sigma(t).
nd::Tensor ve_reverse_step(const nd::Tensor& x_t, double t, double dt, const nd::Tensor& eps_hat,
                           const VeSchedule& schedule, const nd::Tensor& z);

}  // namespace ctrtab::diffusion
