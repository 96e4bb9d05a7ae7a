#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::diffusion {

// Discrete DDPM noise schedule. Timesteps are 1-based: t in [1, T]. Index 0 of
// the cumulative product is the convention alpha_bar(0) = 1.
class DdpmSchedule {
 public:
  DdpmSchedule() = default;

  // Linear beta ramp from beta_start to beta_end over T steps.
  static DdpmSchedule linear(std::size_t steps, double beta_start, double beta_end);
  // Arbitrary betas; each must lie in (0, 1) and be non-decreasing.
  static DdpmSchedule from_betas(std::vector<double> betas);

  std::size_t steps() const noexcept { return betas_.size(); }
  double beta(std::size_t t) const { return betas_.at(check(t) - 1); }
  double alpha(std::size_t t) const { return 1.0 - beta(t); }
  double alpha_bar(std::size_t t) const;  // t in [0, T]
  // (1 - alpha_bar(t-1)) / (1 - alpha_bar(t)) * beta(t)
  double posterior_variance(std::size_t t) const { return posterior_var_.at(check(t) - 1); }

  double beta_start() const { return betas_.front(); }
  double beta_end() const { return betas_.back(); }

  nlohmann::json to_json() const;
  static DdpmSchedule from_json(const nlohmann::json& j);

  friend bool operator==(const DdpmSchedule&, const DdpmSchedule&) = default;

 private:
  std::size_t check(std::size_t t) const;
  void derive();

  std::vector<double> betas_;
  std::vector<double> alpha_bar_;  // size T + 1, alpha_bar_[0] = 1
  std::vector<double> posterior_var_;
};

// Variance-exploding SDE: sigma(t) = sigma_min (sigma_max / sigma_min)^t on
// t in [0, 1], zero drift, g(t)^2 = d sigma^2 / dt.
class VeSchedule {
 public:
  VeSchedule() = default;
  VeSchedule(double sigma_min, double sigma_max, std::size_t steps);

  double sigma(double t) const;
  double diffusion_sq(double t) const;  // g(t)^2
  double sigma_min() const noexcept { return sigma_min_; }
  double sigma_max() const noexcept { return sigma_max_; }
  std::size_t steps() const noexcept { return steps_; }

  nlohmann::json to_json() const;
  static VeSchedule from_json(const nlohmann::json& j);

  friend bool operator==(const VeSchedule&, const VeSchedule&) = default;

 private:
  double sigma_min_ = 0.01;
  double sigma_max_ = 20.0;
  std::size_t steps_ = 100;
};

}  // namespace ctrtab::diffusion
