#include "ctrtab/theory/harness.hpp"

#include <cmath>
#include <numeric>

#include "ctrtab/error.hpp"
#include "ctrtab/nd/ops.hpp"
#include "ctrtab/nd/rng.hpp"
#include "ctrtab/train/adamw.hpp"
#include "ctrtab/train/trainer.hpp"

namespace ctrtab::theory {

using nd::Tensor;
using nd::Var;
using nlohmann::json;

std::vector<double> Probe::point_losses(const Tensor& c) const {
  nd::Tape tape;
  const Tensor& y = forward(tape, tape.constant(c)).value();
  const Tensor& e = targets();
  nd::require_same_shape(y, e, "probe output");
  std::vector<double> out(y.rows(), 0.0);
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t k = 0; k < y.cols(); ++k) out[r] += (y(r, k) - e(r, k)) * (y(r, k) - e(r, k));
  return out;
}

double Probe::loss() const {
  const auto l = point_losses(conditions());
  return std::accumulate(l.begin(), l.end(), 0.0) / static_cast<double>(l.size());
}

namespace {

void check_points(const Tensor& c, const Tensor& e) {
  nd::require_rank2(c, "probe conditions");
  nd::require_same_shape(c, e, "probe points");
  if (c.rows() == 0) throw DomainError("probe needs at least one point");
}

}  // namespace

LinearProbe::LinearProbe(Tensor weight, Tensor conditions, Tensor targets)
    : w_(std::move(weight)), c_(std::move(conditions)), e_(std::move(targets)) {
  check_points(c_, e_);
  if (w_.rows() != c_.cols() || w_.cols() != c_.cols()) throw DimensionError("linear probe: W must be dim x dim");
  wt_ = nd::transpose(w_);
}

LinearProbe LinearProbe::random(std::size_t dim, std::size_t points, std::uint64_t seed) {
  nd::Rng rng(seed);
  Tensor w = (1.0 / std::sqrt(static_cast<double>(dim))) * nd::sample_normal(rng.init(), {dim, dim});
  Tensor c = nd::sample_normal(rng.data(), {points, dim});
  Tensor e = nd::sample_normal(rng.noise(), {points, dim});
  return LinearProbe(std::move(w), std::move(c), std::move(e));
}

Var LinearProbe::forward(nd::Tape& tape, const Var& c) const { return nd::matmul(c, tape.constant(wt_)); }

ConstantProbe::ConstantProbe(Tensor value, Tensor conditions, Tensor targets)
    : value_(std::move(value)), c_(std::move(conditions)), e_(std::move(targets)) {
  check_points(c_, e_);
  if (value_.shape() != nd::Shape{1, c_.cols()}) throw DimensionError("constant probe: value must be 1 x dim");
}

Var ConstantProbe::forward(nd::Tape& tape, const Var& c) const {
  return nd::add(tape.constant(Tensor::zeros(c.rows(), c.cols())), tape.constant(value_));
}

SiluProbe::SiluProbe(Params params, Tensor conditions, Tensor targets)
    : p_(std::move(params)), c_(std::move(conditions)), e_(std::move(targets)) {
  check_points(c_, e_);
  const std::size_t d = c_.cols();
  const std::size_t h = p_.w1.cols();
  if (p_.w1.shape() != nd::Shape{d, h} || p_.b1.shape() != nd::Shape{1, h} || p_.w2.shape() != nd::Shape{h, d} ||
      p_.b2.shape() != nd::Shape{1, d}) {
    throw DimensionError("silu probe: inconsistent parameter shapes");
  }
}

SiluProbe SiluProbe::random(std::size_t dim, std::size_t hidden, std::size_t points, std::uint64_t seed) {
  nd::Rng rng(seed);
  Params p;
  p.w1 = std::sqrt(2.0 / static_cast<double>(dim)) * nd::sample_normal(rng.init(), {dim, hidden});
  p.b1 = 0.5 * nd::sample_normal(rng.init(), {1, hidden});
  p.w2 = std::sqrt(2.0 / static_cast<double>(hidden)) * nd::sample_normal(rng.init(), {hidden, dim});
  p.b2 = 0.5 * nd::sample_normal(rng.init(), {1, dim});
  Tensor c = nd::sample_normal(rng.data(), {points, dim});
  Tensor e = nd::sample_normal(rng.noise(), {points, dim});
  return SiluProbe(std::move(p), std::move(c), std::move(e));
}

Var SiluProbe::forward(nd::Tape& tape, const Var& c) const {
  const Var h = nd::silu(nd::linear(c, tape.constant(p_.w1), tape.constant(p_.b1)));
  return nd::linear(h, tape.constant(p_.w2), tape.constant(p_.b2));
}

void SiluProbe::set_targets(Tensor targets) {
  check_points(c_, targets);
  e_ = std::move(targets);
}

double SiluProbe::fit(std::size_t steps, double lr) {
  train::AdamWConfig cfg;
  cfg.lr = lr;
  cfg.weight_decay = 0.0;
  std::vector<Tensor*> params{&p_.w1, &p_.b1, &p_.w2, &p_.b2};
  auto state = train::AdamWState::for_params(cfg, params);
  for (std::size_t s = 0; s < steps; ++s) {
    nd::Tape tape;
    const Var w1 = tape.leaf(p_.w1), b1 = tape.leaf(p_.b1), w2 = tape.leaf(p_.w2), b2 = tape.leaf(p_.b2);
    const Var y = nd::linear(nd::silu(nd::linear(tape.constant(c_), w1, b1)), w2, b2);
    const Var loss = nd::mse(y, tape.constant(e_));
    const auto g = tape.backward(loss);
    const std::vector<Tensor> grads{g.wrt(w1), g.wrt(b1), g.wrt(w2), g.wrt(b2)};
    train::adamw_step(params, grads, state);
  }
  return loss();
}

CtrTabProbe::CtrTabProbe(const net::ModelBundle& bundle, const Tensor& data, std::size_t points, std::uint64_t seed)
    : bundle_(&bundle) {
  nd::Rng rng(seed);
  const auto batch = train::draw_batch(data, points, bundle, rng);
  x_t_ = batch.x_t;
  embed_ = batch.embed;
  c_ = batch.x0;
  e_ = batch.eps;
}

Var CtrTabProbe::forward(nd::Tape& tape, const Var& c) const {
  const auto net = net::bind(tape, bundle_->denoiser, false);
  const Var x = tape.constant(x_t_);
  const Var e = tape.constant(embed_);
  if (!bundle_->has_control()) return net::denoise_forward(x, e, net).eps;
  const auto ctrl = net::bind(tape, *bundle_->control, false);
  return net::fused_forward(x, e, c, net, ctrl, bundle_->flags.use_last_fusion).eps;
}

json RegTerms::to_json() const { return json{{"first", first}, {"second", second}, {"total", total()}}; }

namespace {

// Gradient of sum_i w_i . y(C)_i with respect to C, for a fixed weight matrix.
Tensor weighted_gradient(const Probe& probe, const Tensor& c, const Tensor& weights) {
  nd::Tape tape;
  const Var cv = tape.leaf(c);
  const Var y = probe.forward(tape, cv);
  const Var s = nd::sum(nd::mul(y, tape.constant(weights)));
  return tape.backward(s).wrt(cv);
}

}  // namespace

RegTerms reg_term(const Probe& probe, double fd_step) {
  if (!(fd_step > 0.0)) throw DomainError("reg_term: finite-difference step must be positive");
  const Tensor& c = probe.conditions();
  const std::size_t n = probe.points();
  const std::size_t d = probe.dim();
  RegTerms out;

  // Jacobian rows, one output coordinate at a time.
  {
    nd::Tape tape;
    const Var cv = tape.leaf(c);
    const Var y = probe.forward(tape, cv);
    for (std::size_t k = 0; k < d; ++k) {
      Tensor mask = Tensor::zeros(n, d);
      for (std::size_t r = 0; r < n; ++r) mask(r, k) = 1.0;
      const Tensor g = tape.backward(nd::sum(nd::mul(y, tape.constant(mask)))).wrt(cv);
      if (!nd::all_finite(g)) throw DomainError("reg_term: non-finite Jacobian");
      out.first += nd::frobenius_sq(g);
    }
  }
  out.first /= static_cast<double>(n);

  Tensor residual;
  {
    nd::Tape tape;
    residual = probe.forward(tape, tape.constant(c)).value() - probe.targets();
  }
  for (std::size_t j = 0; j < d; ++j) {
    Tensor plus = c, minus = c;
    for (std::size_t r = 0; r < n; ++r) {
      plus(r, j) += fd_step;
      minus(r, j) -= fd_step;
    }
    const Tensor gp = weighted_gradient(probe, plus, residual);
    const Tensor gm = weighted_gradient(probe, minus, residual);
    for (std::size_t r = 0; r < n; ++r) out.second += (gp(r, j) - gm(r, j)) / (2.0 * fd_step);
  }
  out.second /= static_cast<double>(n);
  if (!std::isfinite(out.first) || !std::isfinite(out.second)) throw DomainError("reg_term: non-finite derivatives");
  return out;
}

json GapEstimate::to_json() const {
  return json{{"eta", eta},
              {"samples", samples},
              {"loss_clean", loss_clean},
              {"loss_noised", loss_noised},
              {"se_noised", se_noised},
              {"gap", gap},
              {"se_gap", se_gap},
              {"reg", reg.to_json()},
              {"predicted", predicted},
              {"insufficient_samples", insufficient_samples}};
}

GapEstimate noised_gap(const Probe& probe, double eta, std::size_t n_mc, std::uint64_t seed, PerturbNoise noise,
                       std::optional<RegTerms> reg) {
  if (!(eta >= 0.0)) throw DomainError("noised_gap: eta must be non-negative");
  if (n_mc < 2) throw DomainError("noised_gap: need at least two samples");
  const Tensor& c = probe.conditions();
  const std::size_t n = probe.points();
  const auto clean = probe.point_losses(c);
  nd::Rng rng(seed);

  std::vector<double> noised_v, gap_v;
  noised_v.reserve(n_mc);
  gap_v.reserve(n_mc);
  const double b = eta / std::sqrt(2.0);
  while (noised_v.size() < n_mc) {
    Tensor delta(c.shape());
    if (eta > 0.0) {
      for (auto& v : delta.data()) {
        switch (noise) {
          case PerturbNoise::laplace: v = rng.noise().laplace(b); break;
          case PerturbNoise::laplace_flipped: v = -rng.noise().laplace(b); break;
          case PerturbNoise::gaussian: v = eta * rng.noise().normal(); break;
        }
      }
    }
    const auto lp = probe.point_losses(c + delta);
    const auto lm = probe.point_losses(c - delta);
    for (std::size_t i = 0; i < n && noised_v.size() < n_mc; ++i) {
      const double v = 0.5 * (lp[i] + lm[i]);
      noised_v.push_back(v);
      gap_v.push_back(v - clean[i]);
    }
  }

  auto mean_se = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double var = ss / static_cast<double>(v.size() - 1);
    return std::pair{m, std::sqrt(var / static_cast<double>(v.size()))};
  };
  GapEstimate est;
  est.eta = eta;
  est.samples = n_mc;
  double clean_sum = 0.0;
  for (std::size_t j = 0; j < n_mc; ++j) clean_sum += clean[j % n];
  est.loss_clean = clean_sum / static_cast<double>(n_mc);
  std::tie(est.loss_noised, est.se_noised) = mean_se(noised_v);
  std::tie(est.gap, est.se_gap) = mean_se(gap_v);
  est.reg = reg ? *reg : reg_term(probe);
  est.predicted = eta * eta * est.reg.total();
  est.insufficient_samples = est.se_gap > 0.2 * std::abs(est.gap);
  return est;
}

json ScalingResult::to_json() const {
  json g = json::array();
  for (const auto& e : gaps) g.push_back(e.to_json());
  json j{{"fitted", fitted}, {"gaps", g}};
  if (fitted) {
    j["slope"] = slope;
    j["intercept"] = intercept;
    j["residuals"] = residuals;
  } else {
    j["reason"] = reason;
  }
  return j;
}

ScalingResult scaling_check(const Probe& probe, std::span<const double> etas, std::size_t n_mc, std::uint64_t seed) {
  if (etas.size() < 4) throw DomainError("scaling_check: need at least four grid points");
  for (double e : etas)
    if (!(e > 0.0)) throw DomainError("scaling_check: grid values must be positive");
  const auto [lo, hi] = std::minmax_element(etas.begin(), etas.end());
  if (*hi < 10.0 * *lo * (1.0 - 1e-12)) throw DomainError("scaling_check: grid must span at least one decade");

  ScalingResult res;
  const RegTerms reg = reg_term(probe);
  // Same seed at every eta: common random numbers across the grid.
  for (double e : etas) res.gaps.push_back(noised_gap(probe, e, n_mc, seed, PerturbNoise::laplace, reg));
  for (const auto& g : res.gaps) {
    if (!(g.gap > 0.0)) {
      res.reason = "non-positive gap at eta = " + std::to_string(g.eta);
      return res;
    }
  }
  const std::size_t m = etas.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log(etas[i]);
    y[i] = std::log(res.gaps[i].gap);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  res.fitted = true;
  res.slope = sxy / sxx;
  res.intercept = my - res.slope * mx;
  for (std::size_t i = 0; i < m; ++i) res.residuals.push_back(y[i] - (res.intercept + res.slope * x[i]));
  return res;
}

json OptimumReport::to_json() const {
  return json{{"loss", loss}, {"reg", reg.to_json()}, {"ratio", ratio ? json(*ratio) : json(nullptr)}};
}

OptimumReport tikhonov_at_optimum_check(const Probe& probe) {
  OptimumReport r;
  r.loss = probe.loss();
  r.reg = reg_term(probe);
  if (r.reg.first > 0.0) r.ratio = std::abs(r.reg.second) / r.reg.first;
  return r;
}

}  // namespace ctrtab::theory
