#include <gtest/gtest.h>

#include <cmath>

#include "ctrtab/data/encoder.hpp"
#include "ctrtab/error.hpp"
#include "ctrtab/synth/synthgen.hpp"
#include "ctrtab/theory/harness.hpp"
#include "ctrtab/train/trainer.hpp"
#include "support.hpp"

using namespace ctrtab;
using namespace ctrtab::theory;
using nd::Tensor;

namespace {

Tensor eval_probe(const Probe& p, const Tensor& c) {
  nd::Tape tape;
  return p.forward(tape, tape.constant(c)).value();
}

// Mean over points of the FD Jacobian's squared Frobenius norm.
double fd_first_term(const Probe& p) {
  const double h = 1e-6;
  double total = 0;
  // Perturbing one column of every point at once is valid since rows do not interact.
  for (std::size_t j = 0; j < p.dim(); ++j) {
    Tensor up = p.conditions(), down = p.conditions();
    for (std::size_t i = 0; i < p.points(); ++i) {
      up(i, j) += h;
      down(i, j) -= h;
    }
    total += nd::frobenius_sq(eval_probe(p, up) - eval_probe(p, down)) / (4 * h * h);
  }
  return total / static_cast<double>(p.points());
}

SiluProbe fitted_student(std::size_t steps) {
  auto p = SiluProbe::random(4, 8, 32, 3);
  const auto teacher = SiluProbe::random(4, 8, 1, 77);
  p.set_targets(eval_probe(teacher, p.conditions()));
  p.fit(steps, 1e-2);
  return p;
}

}  // namespace

TEST(RegTerm, LinearProbeIsExact) {
  const auto p = LinearProbe::random(5, 16, 1);
  const auto r = reg_term(p);
  EXPECT_NEAR(r.first, p.frobenius_sq(), 1e-10 * p.frobenius_sq());
  EXPECT_NEAR(r.second, 0.0, 1e-8);
}

TEST(RegTerm, ConstantProbeVanishes) {
  const ConstantProbe p(Tensor::from_rows({{0.5, -1.0, 2.0}}), test::randn(8, 3, 1), test::randn(8, 3, 2));
  const auto r = reg_term(p);
  EXPECT_EQ(r.first, 0.0);
  EXPECT_EQ(r.second, 0.0);
}

TEST(RegTerm, SiluFirstTermMatchesFiniteDifferenceJacobian) {
  const auto p = SiluProbe::random(4, 8, 20, 5);
  const double fd = fd_first_term(p);
  EXPECT_NEAR(reg_term(p).first / fd, 1.0, 1e-3);
}

TEST(RegTerm, SiluSecondTermMatchesNestedDifferences) {
  const auto p = SiluProbe::random(3, 6, 6, 9);
  const double h = 1e-4;
  double total = 0;
  for (std::size_t i = 0; i < p.points(); ++i) {
    const Tensor c = p.conditions().slice_rows(i, i + 1);
    const Tensor y = eval_probe(p, c);
    const Tensor e = p.targets().slice_rows(i, i + 1);
    for (std::size_t j = 0; j < p.dim(); ++j) {
      Tensor up = c, down = c;
      up[j] += h;
      down[j] -= h;
      const Tensor d2 = (1.0 / (h * h)) * (eval_probe(p, up) + eval_probe(p, down) - 2.0 * y);
      for (std::size_t k = 0; k < y.size(); ++k) total += (y[k] - e[k]) * d2[k];
    }
  }
  total /= static_cast<double>(p.points());
  EXPECT_NEAR(reg_term(p).second, total, 1e-4 * std::max(1.0, std::abs(total)));
}

TEST(Gap, ZeroEtaGivesZeroGap) {
  const auto p = SiluProbe::random(4, 8, 16, 2);
  const auto g = noised_gap(p, 0.0, 1000, 1);
  EXPECT_EQ(g.gap, 0.0);
  EXPECT_EQ(g.loss_noised, g.loss_clean);
}

TEST(Gap, LinearWithinThreeStandardErrorsAcrossTrials) {
  int inside = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto p = LinearProbe::random(1 + trial % 8, 16, trial);
    const double eta = trial % 2 ? 1e-2 : 1e-1;
    const auto g = noised_gap(p, eta, 10000, 1000 + trial);
    const double expect = eta * eta * p.frobenius_sq();
    EXPECT_NEAR(g.predicted, expect, 1e-9 * expect);
    inside += std::abs(g.gap - expect) <= 3 * g.se_gap;
  }
  EXPECT_GE(inside, 99);
}

TEST(Gap, InvariantToNoiseSignAndFamily) {
  const auto p = SiluProbe::random(4, 8, 32, 4);
  const double eta = 1e-2;
  const auto a = noised_gap(p, eta, 100000, 7, PerturbNoise::laplace);
  const auto b = noised_gap(p, eta, 100000, 8, PerturbNoise::laplace_flipped);
  const auto c = noised_gap(p, eta, 100000, 9, PerturbNoise::gaussian);
  const double se_ab = std::hypot(a.se_gap, b.se_gap), se_ac = std::hypot(a.se_gap, c.se_gap);
  EXPECT_LT(std::abs(a.gap - b.gap), 4 * se_ab);
  EXPECT_LT(std::abs(a.gap - c.gap), 4 * se_ac);
  EXPECT_NEAR(a.gap / (eta * eta) / a.reg.total(), 1.0, 0.1);
  EXPECT_FALSE(a.insufficient_samples);
}

TEST(Scaling, LinearSlopeIsTwo) {
  const auto p = LinearProbe::random(4, 32, 6);
  const std::vector<double> etas{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  const auto r = scaling_check(p, etas, 20000, 3);
  ASSERT_TRUE(r.fitted);
  EXPECT_NEAR(r.slope, 2.0, 0.01);
  EXPECT_EQ(r.residuals.size(), etas.size());
}

TEST(Scaling, SiluSlopeNearTwo) {
  const auto p = SiluProbe::random(4, 8, 64, 1);
  const std::vector<double> etas{1e-3, 3e-3, 1e-2, 3e-2};
  const auto r = scaling_check(p, etas, 100000, 5);
  ASSERT_TRUE(r.fitted);
  EXPECT_GE(r.slope, 1.9);
  EXPECT_LE(r.slope, 2.1);
}

TEST(Scaling, ConstantProbeIsRefusedAndGridIsChecked) {
  const ConstantProbe p(Tensor::from_rows({{1.0, 2.0}}), test::randn(4, 2, 1), test::randn(4, 2, 2));
  const std::vector<double> etas{1e-3, 3e-3, 1e-2, 3e-2};
  const auto r = scaling_check(p, etas, 100, 1);
  EXPECT_FALSE(r.fitted);
  EXPECT_FALSE(r.reason.empty());
  const std::vector<double> short_grid{1e-3, 2e-3, 4e-3, 8e-3};
  EXPECT_THROW(scaling_check(p, short_grid, 100, 1), DomainError);
  const std::vector<double> three{1e-3, 1e-2, 1e-1};
  EXPECT_THROW(scaling_check(p, three, 100, 1), DomainError);
}

TEST(Optimum, RatioShrinksWhenFitted) {
  const auto fitted = fitted_student(20000);
  const auto rep = tikhonov_at_optimum_check(fitted);
  EXPECT_LT(rep.loss, 1e-3);
  ASSERT_TRUE(rep.ratio);
  EXPECT_LT(*rep.ratio, 0.1);
  const auto lin = tikhonov_at_optimum_check(LinearProbe::random(3, 8, 2));
  EXPECT_NEAR(*lin.ratio, 0.0, 1e-6);
  const ConstantProbe k(Tensor::from_rows({{1.0}}), test::randn(4, 1, 1), test::randn(4, 1, 2));
  EXPECT_FALSE(tikhonov_at_optimum_check(k).ratio);
}

TEST(CtrTabProbe, RegTermMatchesFiniteDifferences) {
  const auto t = synth::gaussian_mixture_table(60, 1);
  const auto enc = data::fit_encoder(t);
  const Tensor x = data::encode(t, enc).matrix;
  train::TrainConfig c;
  c.steps = 20;
  c.batch = 16;
  c.timesteps = 20;
  c.hidden = 8;
  c.time_dim = 8;
  auto s1 = train::train_denoiser(x, enc, c);
  const auto s2 = train::train_control(x, s1.bundle, c);
  const CtrTabProbe p(s2.bundle, x, 10, 3);
  EXPECT_EQ(p.points(), 10u);
  const auto r = reg_term(p);
  EXPECT_NEAR(r.first / fd_first_term(p), 1.0, 1e-3);
  EXPECT_TRUE(std::isfinite(r.second));
}
