#include "ctrtab/diffusion/schedule.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "ctrtab/error.hpp"

namespace ctrtab::diffusion {

using nlohmann::json;

DdpmSchedule DdpmSchedule::linear(std::size_t steps, double beta_start, double beta_end) {
  if (steps < 1) throw DomainError("ddpm schedule: T must be at least 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw DomainError("ddpm schedule: need 0 < beta_start <= beta_end < 1, got " + std::to_string(beta_start) +
                      ", " + std::to_string(beta_end));
  }
  std::vector<double> betas(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    betas[i] = beta_start + frac * (beta_end - beta_start);
  }
  return from_betas(std::move(betas));
}

DdpmSchedule DdpmSchedule::from_betas(std::vector<double> betas) {
  if (betas.empty()) throw DomainError("ddpm schedule: T must be at least 1");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0 && betas[i] < 1.0)) throw DomainError("ddpm schedule: beta out of (0, 1)");
    if (i && betas[i] < betas[i - 1]) throw DomainError("ddpm schedule: betas must be non-decreasing");
  }
  DdpmSchedule s;
  s.betas_ = std::move(betas);
  s.derive();
  return s;
}

void DdpmSchedule::derive() {
  const std::size_t T = betas_.size();
  alpha_bar_.assign(T + 1, 1.0);
  posterior_var_.assign(T, 0.0);
  for (std::size_t t = 1; t <= T; ++t) alpha_bar_[t] = alpha_bar_[t - 1] * (1.0 - betas_[t - 1]);
  for (std::size_t t = 1; t <= T; ++t)
    posterior_var_[t - 1] = (1.0 - alpha_bar_[t - 1]) / (1.0 - alpha_bar_[t]) * betas_[t - 1];
}

std::size_t DdpmSchedule::check(std::size_t t) const {
  if (t < 1 || t > betas_.size())
    throw DomainError("timestep " + std::to_string(t) + " outside [1, " + std::to_string(betas_.size()) + "]");
  return t;
}

double DdpmSchedule::alpha_bar(std::size_t t) const {
  if (t > betas_.size())
    throw DomainError("timestep " + std::to_string(t) + " outside [0, " + std::to_string(betas_.size()) + "]");
  return alpha_bar_[t];
}

json DdpmSchedule::to_json() const { return json{{"kind", "ddpm"}, {"betas", betas_}}; }

DdpmSchedule DdpmSchedule::from_json(const json& j) {
  if (j.value("kind", "") != "ddpm") throw FormatError("schedule: expected kind 'ddpm'");
  return from_betas(j.at("betas").get<std::vector<double>>());
}

VeSchedule::VeSchedule(double sigma_min, double sigma_max, std::size_t steps)
    : sigma_min_(sigma_min), sigma_max_(sigma_max), steps_(steps) {
  if (!(sigma_min > 0.0 && sigma_min < sigma_max)) throw DomainError("ve schedule: need 0 < sigma_min < sigma_max");
  if (steps < 1) throw DomainError("ve schedule: need at least one discretization step");
}

double VeSchedule::sigma(double t) const {
  if (t == 0.0) return sigma_min_;
  if (t == 1.0) return sigma_max_;
  return sigma_min_ * std::pow(sigma_max_ / sigma_min_, t);
}

double VeSchedule::diffusion_sq(double t) const {
  const double s = sigma(t);
  return 2.0 * s * s * std::log(sigma_max_ / sigma_min_);
}

json VeSchedule::to_json() const {
  return json{{"kind", "ve"}, {"sigma_min", sigma_min_}, {"sigma_max", sigma_max_}, {"steps", steps_}};
}

VeSchedule VeSchedule::from_json(const json& j) {
  if (j.value("kind", "") != "ve") throw FormatError("schedule: expected kind 've'");
  return VeSchedule(j.at("sigma_min").get<double>(), j.at("sigma_max").get<double>(), j.at("steps").get<std::size_t>());
}

}  // namespace ctrtab::diffusion
