#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrtab/net/control.hpp"
#include "ctrtab/nd/tape.hpp"

namespace ctrtab::theory {

// A map y(C) evaluated row-wise at a fixed set of probe points, each with a
// clean condition C_i and a noise target eps_i. Rows must not interact.
class Probe {
 public:
  virtual ~Probe() = default;

  virtual std::string name() const = 0;
  virtual const nd::Tensor& conditions() const = 0;  // points x dim
  virtual const nd::Tensor& targets() const = 0;     // points x dim
  virtual nd::Var forward(nd::Tape& tape, const nd::Var& c) const = 0;

  std::size_t dim() const { return conditions().cols(); }
  std::size_t points() const { return conditions().rows(); }
  // Per-point ||y(C_i) - eps_i||^2.
  std::vector<double> point_losses(const nd::Tensor& c) const;
  double loss() const;
};

// y = C W^T with a random W.
class LinearProbe : public Probe {
 public:
  LinearProbe(nd::Tensor weight, nd::Tensor conditions, nd::Tensor targets);
  static LinearProbe random(std::size_t dim, std::size_t points, std::uint64_t seed);

  std::string name() const override { return "linear"; }
  const nd::Tensor& conditions() const override { return c_; }
  const nd::Tensor& targets() const override { return e_; }
  nd::Var forward(nd::Tape& tape, const nd::Var& c) const override;

  const nd::Tensor& weight() const { return w_; }
  double frobenius_sq() const { return nd::frobenius_sq(w_); }

 private:
  nd::Tensor w_, wt_, c_, e_;
};

// y = const, independent of C.
class ConstantProbe : public Probe {
 public:
  ConstantProbe(nd::Tensor value, nd::Tensor conditions, nd::Tensor targets);

  std::string name() const override { return "constant"; }
  const nd::Tensor& conditions() const override { return c_; }
  const nd::Tensor& targets() const override { return e_; }
  nd::Var forward(nd::Tape& tape, const nd::Var& c) const override;

 private:
  nd::Tensor value_, c_, e_;
};

// y = SiLU(C W1 + b1) W2 + b2.
class SiluProbe : public Probe {
 public:
  struct Params {
    nd::Tensor w1, b1, w2, b2;
  };

  SiluProbe(Params params, nd::Tensor conditions, nd::Tensor targets);
  static SiluProbe random(std::size_t dim, std::size_t hidden, std::size_t points, std::uint64_t seed);

  std::string name() const override { return "silu"; }
  const nd::Tensor& conditions() const override { return c_; }
  const nd::Tensor& targets() const override { return e_; }
  nd::Var forward(nd::Tape& tape, const nd::Var& c) const override;

  const Params& params() const { return p_; }
  void set_targets(nd::Tensor targets);
  // Full-batch AdamW (no weight decay) on the probe loss; returns the final loss.
  double fit(std::size_t steps, double lr);

 private:
  Params p_;
  nd::Tensor c_, e_;
};

// y(C) = fused noise prediction of a bundle at fixed (x_t, t). Points follow
// the training sampler: x0 drawn from data, t uniform, eps standard normal,
// C = x0.
class CtrTabProbe : public Probe {
 public:
  CtrTabProbe(const net::ModelBundle& bundle, const nd::Tensor& data, std::size_t points, std::uint64_t seed);

  std::string name() const override { return "ctrtab"; }
  const nd::Tensor& conditions() const override { return c_; }
  const nd::Tensor& targets() const override { return e_; }
  nd::Var forward(nd::Tape& tape, const nd::Var& c) const override;

 private:
  const net::ModelBundle* bundle_;
  nd::Tensor x_t_, embed_, c_, e_;
};

struct RegTerms {
  double first = 0.0;   // mean_i ||dy/dC (C_i)||_F^2
  double second = 0.0;  // mean_i sum_j (y_i - eps_i) . d^2 y / dC_j^2
  double total() const { return first + second; }
  nlohmann::json to_json() const;
};

// First term from the autodiff Jacobian; second from central differences of
// autodiff gradients with the residual held at its base value.
RegTerms reg_term(const Probe& probe, double fd_step = 1e-4);

enum class PerturbNoise { laplace, laplace_flipped, gaussian };

struct GapEstimate {
  double eta = 0.0;
  std::size_t samples = 0;
  double loss_clean = 0.0;
  double loss_noised = 0.0;
  double se_noised = 0.0;
  double gap = 0.0;
  double se_gap = 0.0;
  RegTerms reg;
  double predicted = 0.0;  // eta^2 (first + second)
  bool insufficient_samples = false;  // se_gap > 0.2 |gap|

  nlohmann::json to_json() const;
};

// Monte Carlo estimate of E[loss(C + delta)] - loss(C) with delta of
// per-coordinate variance eta^2 (Laplace b = eta / sqrt 2 by default).
// Sample j uses point j mod points and an antithetic pair +-delta; the clean
// loss shares the same points.
GapEstimate noised_gap(const Probe& probe, double eta, std::size_t n_mc, std::uint64_t seed,
                       PerturbNoise noise = PerturbNoise::laplace, std::optional<RegTerms> reg = {});

struct ScalingResult {
  bool fitted = false;
  std::string reason;  // set when the fit is refused
  std::vector<GapEstimate> gaps;
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;

  nlohmann::json to_json() const;
};

// Least-squares fit of log gap against log eta. Needs at least four grid
// points spanning a decade; refuses (fitted = false) if any gap is <= 0.
ScalingResult scaling_check(const Probe& probe, std::span<const double> etas, std::size_t n_mc, std::uint64_t seed);

struct OptimumReport {
  double loss = 0.0;
  RegTerms reg;
  std::optional<double> ratio;  // |second| / first, empty when first == 0

  nlohmann::json to_json() const;
};

OptimumReport tikhonov_at_optimum_check(const Probe& probe);

}  // namespace ctrtab::theory
