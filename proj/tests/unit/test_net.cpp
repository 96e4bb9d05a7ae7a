#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "ctrtab/error.hpp"
#include "ctrtab/net/control.hpp"
#include "ctrtab/net/denoiser.hpp"
#include "support.hpp"

using namespace ctrtab;
using namespace ctrtab::net;
using nd::Tensor;
using nd::Var;
using test::randn;

namespace {

Tensor dense_ref(const Tensor& x, const Dense& d) {
  Tensor y = nd::matmul(x, d.weight);
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += d.bias(0, c);
  return y;
}

Tensor silu_ref(Tensor x) {
  for (auto& v : x.data()) v = v / (1.0 + std::exp(-v));
  return x;
}

// Independent forward pass written with plain tensor algebra.
Tensor denoiser_ref(const DenoiserParams& p, const Tensor& x, const Tensor& embed) {
  const Tensor temb = dense_ref(silu_ref(dense_ref(embed, p.time1)), p.time2);
  const Tensor x_left = dense_ref(x, p.input) + temb;
  const Tensor h_left = silu_ref(dense_ref(silu_ref(dense_ref(x_left, p.hidden1)), p.hidden2));
  return dense_ref(silu_ref(dense_ref(h_left, p.hidden3)), p.output);
}

void randomize(ZeroConv& zc, std::uint64_t seed) {
  zc.weight = randn(zc.weight.rows(), zc.weight.cols(), seed);
  zc.bias = randn(1, zc.bias.cols(), seed + 1);
}

}  // namespace

TEST(TimeEmbed, MatchesFormula) {
  TimeEmbedConfig cfg{8, 10000.0};
  const Tensor e = sin_time_embed(37.0, cfg);
  ASSERT_EQ(e.shape(), (nd::Shape{1, 8}));
  for (std::size_t j = 0; j < 4; ++j) {
    const double w = std::pow(10000.0, -static_cast<double>(j) / 3.0);
    EXPECT_NEAR(e(0, j), std::sin(37.0 * w), 1e-14);
    EXPECT_NEAR(e(0, 4 + j), std::cos(37.0 * w), 1e-14);
  }
  const std::vector<double> ts{0.0, 37.0};
  const Tensor both = sin_time_embed(ts, cfg);
  EXPECT_EQ(both.slice_rows(1, 2), e);
  EXPECT_THROW(sin_time_embed(1.0, TimeEmbedConfig{7, 100.0}), DomainError);
}

TEST(Denoiser, ShapesAndParameterCount) {
  nd::RngStream rng(1);
  const std::size_t D = 5, H = 8, T = 64;
  const auto p = init_params(rng, D, H);
  p.validate();
  EXPECT_EQ(p.parameter_count(), (T * H + H) + 4 * (H * H + H) + (D * H + H) + (H * D + D));
  EXPECT_EQ(p.named().size(), 14u);
  EXPECT_EQ(p.named().front().name, "time1.weight");
  EXPECT_EQ(p.named().back().name, "output.bias");
  auto broken = p;
  broken.hidden2.weight = Tensor::zeros(H, H + 1);
  EXPECT_THROW(broken.validate(), DimensionError);
}

TEST(Denoiser, HeInitVariance) {
  nd::RngStream rng(2);
  const auto d = he_dense(rng, 400, 300);
  double s = 0.0;
  for (double v : d.weight.data()) s += v * v;
  EXPECT_NEAR(s / static_cast<double>(d.weight.size()), 2.0 / 400.0, 0.02 * 2.0 / 400.0 * 5);
  EXPECT_EQ(d.bias, Tensor::zeros(1, 300));
}

TEST(Denoiser, ForwardMatchesReference) {
  nd::RngStream rng(3);
  auto p = init_params(rng, 6, 16, TimeEmbedConfig{16, 10000.0});
  for (auto& nt : p.named())
    if (nt.name.ends_with(".bias")) *nt.tensor = randn(1, nt.tensor->cols(), nt.name.size());
  const Tensor x = randn(7, 6, 4);
  const std::vector<double> ts{1, 5, 9, 100, 3, 3, 42};
  const Tensor got = denoise(x, ts, p);
  const Tensor want = denoiser_ref(p, x, sin_time_embed(ts, p.time));
  EXPECT_LT(nd::max_abs_diff(got, want), 1e-12);
}

TEST(Control, AttachCopiesBlocksAndZeroesAdapters) {
  nd::RngStream rng(4);
  const auto p = init_params(rng, 5, 8);
  const auto c = attach_control(p, 0.01);
  EXPECT_EQ(c.input, p.input);
  EXPECT_EQ(c.hidden1, p.hidden1);
  EXPECT_EQ(c.hidden2, p.hidden2);
  for (const auto* zc : {&c.zc_in, &c.zc_mid, &c.zc_last}) {
    EXPECT_EQ(nd::max_abs(zc->weight), 0.0);
    EXPECT_EQ(nd::max_abs(zc->bias), 0.0);
  }
  EXPECT_EQ(c.zc_in.weight.shape(), (nd::Shape{5, 5}));
  EXPECT_EQ(c.zc_mid.weight.shape(), (nd::Shape{8, 8}));
  const auto e = attach_control(p, 0.01, ZeroConvKind::elementwise);
  EXPECT_EQ(e.zc_mid.weight.shape(), (nd::Shape{1, 8}));
  EXPECT_THROW(zero_conv(ZeroConvKind::elementwise, 3, 4), DimensionError);
}

TEST(Control, ZeroInitFusedForwardIsBitIdentical) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    nd::RngStream rng(seed);
    const std::size_t D = 2 + seed % 5, H = 4 + 2 * (seed % 4), N = 1 + seed % 6;
    const auto p = init_params(rng, D, H, TimeEmbedConfig{8, 10000.0});
    for (auto kind : {ZeroConvKind::dense, ZeroConvKind::elementwise}) {
      const auto c = attach_control(p, 0.1, kind);
      std::vector<double> ts(N);
      for (auto& t : ts) t = static_cast<double>(1 + rng.index(100));
      const Tensor x = randn(N, D, seed + 10), cf = randn(N, D, seed + 20);
      for (bool last : {true, false}) {
        nd::Tape tape;
        const auto net = bind(tape, p, false);
        const auto ctl = bind(tape, c, false);
        const Var xv = tape.constant(x), ev = tape.constant(sin_time_embed(ts, p.time));
        const Tensor fused = fused_forward(xv, ev, tape.constant(cf), net, ctl, last).eps.value();
        const Tensor bare = denoise_forward(xv, ev, net).eps.value();
        EXPECT_EQ(fused, bare) << seed;
      }
    }
  }
}

TEST(Control, GradientsReachZeroConvsAtInit) {
  nd::RngStream rng(5);
  const auto p = init_params(rng, 4, 8, TimeEmbedConfig{8, 10000.0});
  const auto c = attach_control(p, 0.1);
  nd::Tape tape;
  const auto net = bind(tape, p, false);
  const auto ctl = bind(tape, c, true);
  const std::vector<double> ts{3, 7, 11};
  const auto out = fused_forward(tape.constant(randn(3, 4, 1)), tape.constant(sin_time_embed(ts, p.time)),
                                 tape.constant(randn(3, 4, 2)), net, ctl, true);
  const auto g = tape.backward(nd::mse(out.eps, tape.constant(randn(3, 4, 3))));
  EXPECT_GT(nd::max_abs(g.wrt(ctl.zc_mid.weight)), 0.0);
  EXPECT_GT(nd::max_abs(g.wrt(ctl.zc_last.weight)), 0.0);
  // zc_in feeds the copied blocks only through zc_mid, which is still zero.
  EXPECT_EQ(nd::max_abs(g.wrt(ctl.zc_in.weight)), 0.0);
  EXPECT_EQ(ctl.vars().size(), c.named().size());
}

TEST(Control, FusedForwardMatchesReference) {
  nd::RngStream rng(6);
  const auto p = init_params(rng, 3, 6, TimeEmbedConfig{8, 10000.0});
  auto c = attach_control(p, 0.1);
  randomize(c.zc_in, 1);
  randomize(c.zc_mid, 2);
  randomize(c.zc_last, 3);
  const Tensor x = randn(4, 3, 7), cf = randn(4, 3, 8);
  const std::vector<double> ts{1, 2, 3, 4};
  const Tensor embed = sin_time_embed(ts, p.time);
  const Tensor temb = dense_ref(silu_ref(dense_ref(embed, p.time1)), p.time2);
  auto zc = [](const Tensor& v, const ZeroConv& z) { return dense_ref(v, Dense{z.weight, z.bias}); };
  const Tensor h_left =
      silu_ref(dense_ref(silu_ref(dense_ref(dense_ref(x, p.input) + temb, p.hidden1)), p.hidden2));
  const Tensor x_right = dense_ref(zc(cf, c.zc_in) + x, c.input) + temb;
  const Tensor h_right = silu_ref(dense_ref(silu_ref(dense_ref(x_right, c.hidden1)), c.hidden2));
  const Tensor eps_ref =
      dense_ref(silu_ref(dense_ref(h_left + zc(h_right, c.zc_mid), p.hidden3)), p.output) + zc(cf, c.zc_last);
  ModelBundle bundle;
  bundle.denoiser = p;
  bundle.control = c;
  EXPECT_LT(nd::max_abs_diff(predict_noise(bundle, x, ts, &cf), eps_ref), 1e-12);
  EXPECT_LT(nd::max_abs_diff(predict_noise(bundle, x, ts, nullptr), denoise(x, ts, p)), 0.0 + 1e-300);
}

TEST(Control, ElementwiseZeroConvScalesColumns) {
  nd::Tape tape;
  ZeroConv z = zero_conv(ZeroConvKind::elementwise, 3, 3);
  z.weight = Tensor::from_rows({{1.0, 2.0, -1.0}});
  z.bias = Tensor::from_rows({{0.5, 0.0, 0.0}});
  BoundZeroConv b{z.kind, tape.constant(z.weight), tape.constant(z.bias)};
  const Tensor y = apply(tape.constant(Tensor::from_rows({{1, 1, 1}, {2, 3, 4}})), b).value();
  EXPECT_EQ(y, Tensor::from_rows({{1.5, 2, -1}, {2.5, 6, -4}}));
}

TEST(Condition, NoiseFamiliesShareVariance) {
  const Tensor x0 = Tensor::zeros(100000, 1);
  const double b = 0.3;
  for (auto type : {NoiseType::laplace, NoiseType::gaussian, NoiseType::uniform}) {
    nd::RngStream rng(7);
    const Tensor c = make_condition(x0, b, type, rng);
    double m = 0, v = 0, mx = 0;
    for (double x : c.data()) {
      m += x;
      v += x * x;
      mx = std::max(mx, std::abs(x));
    }
    EXPECT_NEAR(m / 1e5, 0.0, 0.01);
    EXPECT_NEAR(v / 1e5 / (2 * b * b), 1.0, 0.03) << to_string(type);
    if (type == NoiseType::uniform) EXPECT_LE(mx, std::sqrt(6.0) * b);
  }
  nd::RngStream rng(8);
  const Tensor x = randn(3, 3, 1);
  EXPECT_EQ(make_condition(x, 0.0, NoiseType::laplace, rng), x);
  EXPECT_THROW(make_condition(x, -1.0, NoiseType::laplace, rng), DomainError);
}

TEST(Dropout, InvertedScalingAndIdentityWhenOff) {
  nd::Tape tape;
  const Var h = tape.constant(Tensor::filled(200, 50, 1.0));
  EXPECT_EQ(maybe_dropout(h, {}).value(), h.value());
  nd::RngStream rng(9);
  const Tensor d = maybe_dropout(h, {0.2, &rng}).value();
  double s = 0.0;
  for (double v : d.data()) {
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.25) < 1e-15);
    s += v;
  }
  EXPECT_NEAR(s / 10000.0, 1.0, 0.03);
}

TEST(Enums, StringRoundTrip) {
  for (auto k : {ZeroConvKind::dense, ZeroConvKind::elementwise}) EXPECT_EQ(zero_conv_kind_from_string(to_string(k)), k);
  for (auto n : {NoiseType::laplace, NoiseType::gaussian, NoiseType::uniform})
    EXPECT_EQ(noise_type_from_string(to_string(n)), n);
  for (auto p : {Process::ddpm, Process::ve}) EXPECT_EQ(process_from_string(to_string(p)), p);
  EXPECT_THROW(noise_type_from_string("cauchy"), ConfigError);
  BundleFlags f;
  f.use_last_fusion = false;
  f.noise_type = NoiseType::uniform;
  f.process = Process::ve;
  f.sigma = diffusion::SigmaKind::beta;
  EXPECT_EQ(BundleFlags::from_json(f.to_json()), f);
  EXPECT_EQ(model_time(Process::ddpm, 17.0), 17.0);
  EXPECT_EQ(model_time(Process::ve, 0.25), 250.0);
}
