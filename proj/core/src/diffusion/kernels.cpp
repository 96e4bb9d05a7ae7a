#include "ctrtab/diffusion/kernels.hpp"

#include <cmath>

#include "ctrtab/error.hpp"

namespace ctrtab::diffusion {

double reverse_sigma(const DdpmSchedule& schedule, std::size_t t, SigmaKind kind) {
  return kind == SigmaKind::posterior ? std::sqrt(schedule.posterior_variance(t)) : std::sqrt(schedule.beta(t));
}

nd::Tensor forward_sample(const nd::Tensor& x0, std::size_t t, const DdpmSchedule& schedule, const nd::Tensor& eps) {
  nd::require_same_shape(x0, eps, "forward_sample");
  const double ab = schedule.alpha_bar(t);
  if (t == 0) throw DomainError("forward_sample: timestep must be at least 1");
  const double a = std::sqrt(ab);
  const double b = std::sqrt(1.0 - ab);
  nd::Tensor out = x0;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * eps[i];
  return out;
}

Posterior posterior_params(const nd::Tensor& x0, const nd::Tensor& x_t, std::size_t t, const DdpmSchedule& schedule) {
  nd::require_same_shape(x0, x_t, "posterior_params");
  const double beta = schedule.beta(t);
  const double ab = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t - 1);
  Posterior p;
  p.coef_x0 = std::sqrt(ab_prev) * beta / (1.0 - ab);
  p.coef_xt = std::sqrt(1.0 - beta) * (1.0 - ab_prev) / (1.0 - ab);
  p.variance = schedule.posterior_variance(t);
  p.mean = x0;
  for (std::size_t i = 0; i < p.mean.size(); ++i) p.mean[i] = p.coef_x0 * x0[i] + p.coef_xt * x_t[i];
  return p;
}

nd::Tensor ddpm_reverse_step(const nd::Tensor& x_t, std::size_t t, const nd::Tensor& eps_hat,
                             const DdpmSchedule& schedule, const nd::Tensor& z, SigmaKind sigma) {
  nd::require_same_shape(x_t, eps_hat, "ddpm_reverse_step");
  const double alpha = schedule.alpha(t);
  const double ab = schedule.alpha_bar(t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
  const double eps_coef = (1.0 - alpha) / std::sqrt(1.0 - ab);
  nd::Tensor out = x_t;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = inv_sqrt_alpha * (x_t[i] - eps_coef * eps_hat[i]);
  if (t > 1) {
    nd::require_same_shape(x_t, z, "ddpm_reverse_step");
    const double s = reverse_sigma(schedule, t, sigma);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * z[i];
  }
  return out;
}

nd::Tensor ve_perturb(const nd::Tensor& x0, double t, const VeSchedule& schedule, const nd::Tensor& eps) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("ve_perturb: t must lie in [0, 1]");
  nd::require_same_shape(x0, eps, "ve_perturb");
  const double s = schedule.sigma(t);
  nd::Tensor out = x0;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * eps[i];
  return out;
}

nd::Tensor ve_reverse_step(const nd::Tensor& x_t, double t, double dt, const nd::Tensor& eps_hat,
                           const VeSchedule& schedule, const nd::Tensor& z) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("ve_reverse_step: t must lie in [0, 1]");
  if (!(dt >= 0.0) || dt > t) throw DomainError("ve_reverse_step: need 0 <= dt <= t");
  nd::require_same_shape(x_t, eps_hat, "ve_reverse_step");
  nd::require_same_shape(x_t, z, "ve_reverse_step");
  const double s = schedule.sigma(t);
  const double g2 = schedule.diffusion_sq(t);
  const double drift = g2 * dt / s;  // g^2 * score * dt with score = -eps_hat / sigma
  const double noise = std::sqrt(g2 * dt);
  nd::Tensor out = x_t;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x_t[i] - drift * eps_hat[i] + noise * z[i];
  return out;
}

}  // namespace ctrtab::diffusion
