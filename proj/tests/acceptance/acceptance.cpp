// Acceptance runner: one PASS/FAIL line per criterion. Usage:
//   ctrtab_acceptance [criterion ...]   (default: all)
// Exit status is 0 only if every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../support/oracles.hpp"
#include "ctrtab/cli/app.hpp"
#include "ctrtab/cli/pipeline.hpp"
#include "ctrtab/data/encoder.hpp"
#include "ctrtab/diffusion/kernels.hpp"
#include "ctrtab/eval/metrics.hpp"
#include "ctrtab/eval/report.hpp"
#include "ctrtab/nd/ops.hpp"
#include "ctrtab/sample/sampler.hpp"
#include "ctrtab/synth/synthgen.hpp"
#include "ctrtab/theory/harness.hpp"
#include "ctrtab/train/checkpoint.hpp"
#include "ctrtab/train/trainer.hpp"

using namespace ctrtab;
using nd::Tensor;
using nd::Var;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr int c1_configs = 100;
constexpr std::size_t c2_dim = 8, c2_points = 64, c2_mc = 100000;
constexpr double c2_max_se = 3.0;
constexpr std::size_t c3_mc = 100000;
constexpr double c3_slope_lo = 1.9, c3_slope_hi = 2.1, c3_eta = 3e-3, c3_rel = 0.10;
constexpr std::size_t c4_draws = 100000;
constexpr double c4_rel = 0.01;
constexpr std::size_t c5_steps = 10, c5_points = 50;
constexpr double c5_tol = 1e-6;
constexpr int c6_params = 20;
constexpr double c6_fd_step = 1e-5, c6_floor = 1e-6, c6_tol = 1e-4;
constexpr std::size_t c7_rows = 2000;
constexpr double c7_ks = 0.1, c7_density = 0.9;
constexpr std::size_t c8_rows = 3000, c8_informative = 10;
constexpr double c8_class_sep = 1.0, c8_margin = 0.05;
constexpr double c9_b_large = 1000.0, c9_b_default = 0.005, c9_match = 0.05, c9_slack = 0.02;
constexpr int c10_instances = 100;
constexpr double c10_tol = 1e-9;
constexpr std::uint64_t seeds[3] = {1, 2, 3};

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

void progress(const std::string& s) { std::cerr << "  .. " << s << std::endl; }

// --- 1 -----------------------------------------------------------------------

Result zero_init_identity() {
  nd::RngStream pick(2024);
  int failures = 0;
  for (int k = 0; k < c1_configs; ++k) {
    train::TrainConfig cfg;
    const std::size_t D = 1 + pick.index(8);
    cfg.hidden = 4 + pick.index(29);
    cfg.time_dim = 2 * (1 + pick.index(8));
    cfg.timesteps = 2 + pick.index(11);
    cfg.ve_steps = 2 + pick.index(11);
    cfg.seed = 500 + static_cast<std::uint64_t>(k);
    cfg.flags.process = pick.index(4) == 0 ? net::Process::ve : net::Process::ddpm;
    cfg.flags.use_last_fusion = pick.index(2) == 0;
    cfg.flags.zero_conv = pick.index(2) == 0 ? net::ZeroConvKind::dense : net::ZeroConvKind::elementwise;
    cfg.flags.noise_type = static_cast<net::NoiseType>(pick.index(3));
    const double b = std::pow(10.0, -3.0 + 4.0 * pick.uniform());

    const auto bare = train::initial_bundle(D, data::EncoderState{}, cfg);
    auto ctl = bare;
    ctl.control = net::attach_control(bare.denoiser, b, cfg.flags.zero_conv);

    const std::size_t N = 1 + pick.index(9);
    nd::RngStream in(cfg.seed);
    const Tensor x = nd::sample_normal(in, {N, D}), cf = nd::sample_normal(in, {N, D});
    std::vector<double> ts(N);
    for (auto& t : ts) t = static_cast<double>(1 + in.index(1000));
    {
      nd::Tape tape;
      const auto net = net::bind(tape, bare.denoiser, false);
      const auto c = net::bind(tape, *ctl.control, false);
      const Var xv = tape.constant(x), ev = tape.constant(net::sin_time_embed(ts, bare.denoiser.time));
      const Tensor fused = net::fused_forward(xv, ev, tape.constant(cf), net, c, cfg.flags.use_last_fusion).eps.value();
      if (!(fused == net::denoise_forward(xv, ev, net).eps.value())) ++failures;
    }

    const Tensor pool = nd::sample_normal(in, {5 + pick.index(20), D});
    sample::SampleConfig sc;
    sc.n_samples = 1 + pick.index(40);
    sc.chunk = 1 + pick.index(16);
    sc.threads = 1;
    sc.seed = 900 + static_cast<std::uint64_t>(k);
    sc.condition_source = pick.index(2) ? sample::ConditionSource::train_rows_plus_noise
                                        : sample::ConditionSource::fixed_rows;
    const Tensor with_control = sample::sample_batch(ctl, pool, sc);
    sc.condition_source = sample::ConditionSource::none;
    if (!(with_control == sample::sample_batch(bare, pool, sc))) ++failures;
  }
  return {failures == 0, std::to_string(c1_configs) + " configs, " + std::to_string(failures) + " mismatches"};
}

// --- 2 -----------------------------------------------------------------------

Result linear_gap() {
  const auto probe = theory::LinearProbe::random(c2_dim, c2_points, 11);
  const double w2 = probe.frobenius_sq();
  bool ok = true;
  std::string detail = "||W||^2=" + fmt(w2);
  std::uint64_t seed = 100;
  for (double eta : {1e-3, 1e-2, 1e-1}) {
    const auto g = theory::noised_gap(probe, eta, c2_mc, seed++);
    const double expect = eta * eta * w2;
    const double z = std::abs(g.gap - expect) / g.se_gap;
    ok &= z <= c2_max_se;
    detail += "; eta=" + fmt(eta) + " gap=" + fmt(g.gap) + " expect=" + fmt(expect) + " z=" + fmt(z, 3);
  }
  return {ok, detail};
}

// --- 3 -----------------------------------------------------------------------

Result silu_scaling() {
  const auto probe = theory::SiluProbe::random(4, 8, 64, 1);
  const std::vector<double> etas{1e-3, 3e-3, 1e-2, 3e-2};
  const auto s = theory::scaling_check(probe, etas, c3_mc, 5);
  if (!s.fitted) return {false, "scaling fit refused: " + s.reason};
  const auto& g = s.gaps[1];
  const double ratio = g.gap / (c3_eta * c3_eta) / g.reg.total();
  const bool ok = s.slope >= c3_slope_lo && s.slope <= c3_slope_hi && std::abs(ratio - 1.0) <= c3_rel;
  return {ok, "slope=" + fmt(s.slope) + " gap/eta^2=" + fmt(g.gap / (c3_eta * c3_eta)) +
                  " L_R1+L_R2=" + fmt(g.reg.total()) + " ratio=" + fmt(ratio)};
}

// --- 4 -----------------------------------------------------------------------

Result forward_moments() {
  const std::size_t T = 1000;
  const double lo = 1e-4, hi = 0.02, x0v = 1.5;
  const auto s = diffusion::DdpmSchedule::linear(T, lo, hi);
  const Tensor x0 = Tensor::filled(c4_draws, 1, x0v);
  nd::RngStream rng(44);
  bool ok = true;
  std::string detail;
  for (std::size_t t : {std::size_t{1}, T / 2, T}) {
    double ab = 1.0;
    for (std::size_t k = 1; k <= t; ++k) ab *= 1.0 - (lo + (hi - lo) * static_cast<double>(k - 1) / (T - 1));
    const Tensor xt = diffusion::forward_sample(x0, t, s, nd::sample_normal(rng, x0.shape()));
    double m = 0, v = 0;
    for (double x : xt.data()) m += x;
    m /= static_cast<double>(c4_draws);
    for (double x : xt.data()) v += (x - m) * (x - m);
    v /= static_cast<double>(c4_draws);
    const double mu = std::sqrt(ab) * x0v, var = 1.0 - ab;
    // Relative to max(|mu|, sd): at t = T the mean is ~0 and a bare relative
    // error would be undefined.
    const double mean_err = std::abs(m - mu) / std::max(std::abs(mu), std::sqrt(var));
    const double var_err = std::abs(v / var - 1.0);
    ok &= mean_err <= c4_rel && var_err <= c4_rel;
    detail += "t=" + std::to_string(t) + " mean_err=" + fmt(mean_err, 3) + " var_err=" + fmt(var_err, 3) + "; ";
  }
  return {ok, detail};
}

// --- 5 -----------------------------------------------------------------------

Result chain_inversion() {
  const auto s = diffusion::DdpmSchedule::linear(c5_steps, 1e-3, 0.2);
  nd::RngStream rng(55);
  const Tensor x0 = nd::sample_normal(rng, {c5_points, 6});
  Tensor x = diffusion::forward_sample(x0, c5_steps, s, nd::sample_normal(rng, x0.shape()));
  const Tensor z(x0.shape());
  for (std::size_t t = c5_steps; t >= 1; --t) {
    Tensor eps(x0.shape());
    for (std::size_t i = 0; i < eps.size(); ++i)
      eps[i] = (x[i] - std::sqrt(s.alpha_bar(t)) * x0[i]) / std::sqrt(1.0 - s.alpha_bar(t));
    x = diffusion::ddpm_reverse_step(x, t, eps, s, z);
  }
  const double err = nd::max_abs_diff(x, x0);
  return {err < c5_tol, "T=" + std::to_string(c5_steps) + " max|x0_hat - x0|=" + fmt(err)};
}

// --- 6 -----------------------------------------------------------------------

struct Instance {
  net::DenoiserParams den;
  net::ControlParams ctl;
  Tensor x, embed, cf, eps;
  bool last = true;

  double loss() const {
    nd::Tape tape;
    const auto n = net::bind(tape, den, false);
    const auto c = net::bind(tape, ctl, false);
    const Var out = net::fused_forward(tape.constant(x), tape.constant(embed), tape.constant(cf), n, c, last).eps;
    return nd::mse(out, tape.constant(eps)).value().item();
  }
};

Result gradient_check() {
  double worst = 0.0;
  for (int k = 0; k < c6_params; ++k) {
    nd::RngStream rng(600 + static_cast<std::uint64_t>(k));
    Instance in;
    in.den = net::init_params(rng, 5, 8, net::TimeEmbedConfig{8});
    in.ctl = net::attach_control(in.den, 0.1, k % 2 ? net::ZeroConvKind::elementwise : net::ZeroConvKind::dense);
    // Move off the zero-init point so every path carries gradient.
    for (auto& nt : in.ctl.named())
      for (double& v : nt.tensor->data()) v += 0.3 * rng.normal();
    in.last = k % 4 < 2;
    const std::size_t N = 6;
    in.x = nd::sample_normal(rng, {N, 5});
    in.cf = nd::sample_normal(rng, {N, 5});
    in.eps = nd::sample_normal(rng, {N, 5});
    std::vector<double> ts(N);
    for (auto& t : ts) t = static_cast<double>(1 + rng.index(200));
    in.embed = net::sin_time_embed(ts, in.den.time);

    nd::Tape tape;
    const auto n = net::bind(tape, in.den, true);
    const auto c = net::bind(tape, in.ctl, true);
    const Var loss = nd::mse(
        net::fused_forward(tape.constant(in.x), tape.constant(in.embed), tape.constant(in.cf), n, c, in.last).eps,
        tape.constant(in.eps));
    const auto grads = tape.backward(loss);
    std::vector<Var> vars = n.vars();
    for (const auto& v : c.vars()) vars.push_back(v);
    std::vector<nd::Tensor*> tensors;
    for (auto& nt : in.den.named()) tensors.push_back(nt.tensor);
    for (auto& nt : in.ctl.named()) tensors.push_back(nt.tensor);

    for (std::size_t p = 0; p < tensors.size(); ++p) {
      const Tensor g = grads.wrt(vars[p]);
      Tensor& w = *tensors[p];
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i];
        w[i] = keep + c6_fd_step;
        const double up = in.loss();
        w[i] = keep - c6_fd_step;
        const double down = in.loss();
        w[i] = keep;
        const double fd = (up - down) / (2 * c6_fd_step);
        worst = std::max(worst, std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), c6_floor}));
      }
    }
  }
  return {worst < c6_tol, std::to_string(c6_params) + " parameterizations, max rel err=" + fmt(worst)};
}

// --- shared training helpers -------------------------------------------------

struct Trained {
  cli::Prepared prep;
  net::ModelBundle bare;
};

Trained stage1(const data::RawTable& table, std::uint64_t seed) {
  Trained t{cli::prepare(table, 0.2, seed), {}};
  auto cfg = train::TrainConfig::desk();
  cfg.seed = seed;
  t.bare = train::train_denoiser(t.prep.matrix, t.prep.encoder, cfg).bundle;
  return t;
}

net::ModelBundle stage2(const Trained& t, std::uint64_t seed, double b) {
  auto cfg = train::TrainConfig::desk();
  cfg.seed = seed;
  cfg.b = b;
  cfg.stage = train::Stage::control;
  return train::train_control(t.prep.matrix, t.bare, cfg).bundle;
}

data::RawTable generate(const net::ModelBundle& b, const data::RawTable& train, std::uint64_t seed, bool bare,
                        std::size_t n = 0) {
  sample::SampleConfig sc;
  sc.seed = nd::derive_seed(seed, 0x5a);
  if (n) sc.n_samples = n;
  if (bare) sc.condition_source = sample::ConditionSource::none;
  return sample::synthesize_table(b, train, sc);
}

struct F1s {
  double real = 0.0, syn = 0.0;
};

F1s f1_of(const Trained& t, const data::RawTable& syn) {
  const auto r = eval::ml_efficacy(t.prep.train, t.prep.test, syn, t.prep.encoder);
  return {*r.real.f1, *r.synthetic.f1};
}

synth::SynthSpec fig1_spec(std::size_t dim, std::uint64_t seed) {
  synth::SynthSpec s;
  s.n_rows = c8_rows;
  s.n_features = dim;
  s.n_informative = std::min(c8_informative, dim);
  s.class_sep = c8_class_sep;
  s.seed = seed;
  return s;
}

// --- 7 -----------------------------------------------------------------------

Result toy_fidelity() {
  const auto table = synth::gaussian_mixture_table(c7_rows, 7);
  const auto held_out = synth::gaussian_mixture_table(c7_rows, 8);
  const auto enc = data::fit_encoder(table);
  const Tensor x = data::encode(table, enc).matrix;
  auto cfg = train::TrainConfig::desk();
  cfg.seed = 7;
  const auto s1 = train::train_denoiser(x, enc, cfg);
  const auto s2 = train::train_control(x, s1.bundle, cfg);
  const auto syn = generate(s2.bundle, table, 7, false, c7_rows);
  const auto fid = eval::fidelity_scores(held_out, syn);
  bool ok = fid.column_density > c7_density;
  std::string detail;
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> a, b;
    for (const auto& v : held_out.numeric(c)) a.push_back(*v);
    for (const auto& v : syn.numeric(c)) b.push_back(*v);
    const double ks = eval::ks_statistic(a, b);
    ok &= ks < c7_ks;
    detail += "KS(" + held_out.schema[c].name + ")=" + fmt(ks, 3) + " ";
  }
  detail += "column_density=" + fmt(fid.column_density) + " final losses " + fmt(s1.losses.back(), 3) + "/" +
            fmt(s2.losses.back(), 3);
  return {ok, detail};
}

// --- 8 -----------------------------------------------------------------------

Result figure1_analogue() {
  bool ok = true;
  std::string detail;
  for (std::size_t dim : {10, 50, 100}) {
    double gap_bare = 0, gap_ctr = 0;
    for (auto seed : seeds) {
      const auto t = stage1(synth::generate(fig1_spec(dim, seed)), seed);
      const auto ctr = stage2(t, seed, c9_b_default);
      const F1s bare = f1_of(t, generate(t.bare, t.prep.train, seed, true));
      const F1s con = f1_of(t, generate(ctr, t.prep.train, seed, false));
      progress("dim " + std::to_string(dim) + " seed " + std::to_string(seed) + ": real " + fmt(bare.real) +
               " bare " + fmt(bare.syn) + " ctrtab " + fmt(con.syn));
      gap_bare += std::abs(bare.real - bare.syn) / 3.0;
      gap_ctr += std::abs(con.real - con.syn) / 3.0;
    }
    ok &= gap_ctr <= gap_bare;
    if (dim == 100) ok &= gap_bare - gap_ctr >= c8_margin;
    detail += "dim " + std::to_string(dim) + ": gap bare=" + fmt(gap_bare, 3) + " ctrtab=" + fmt(gap_ctr, 3) + "; ";
  }
  return {ok, detail};
}

// --- 9 -----------------------------------------------------------------------

Result noise_convergence() {
  double bare = 0, large = 0, dflt = 0, zero = 0;
  for (auto seed : seeds) {
    const auto t = stage1(synth::generate(fig1_spec(50, seed)), seed);
    bare += f1_of(t, generate(t.bare, t.prep.train, seed, true)).syn / 3.0;
    const double f_large = f1_of(t, generate(stage2(t, seed, c9_b_large), t.prep.train, seed, false)).syn;
    const double f_dflt = f1_of(t, generate(stage2(t, seed, c9_b_default), t.prep.train, seed, false)).syn;
    const double f_zero = f1_of(t, generate(stage2(t, seed, 0.0), t.prep.train, seed, false)).syn;
    progress("seed " + std::to_string(seed) + ": b=1000 " + fmt(f_large) + " b=0.005 " + fmt(f_dflt) + " b=0 " +
             fmt(f_zero));
    large += f_large / 3.0;
    dflt += f_dflt / 3.0;
    zero += f_zero / 3.0;
  }
  const bool ok = std::abs(large - bare) <= c9_match && dflt >= zero - c9_slack;
  return {ok, "F1 bare=" + fmt(bare) + " b=1000: " + fmt(large) + " b=0.005: " + fmt(dflt) + " b=0: " + fmt(zero)};
}

// --- 10 ----------------------------------------------------------------------

Result metric_oracles() {
  nd::RngStream rng(1010);
  std::map<std::string, double> worst;
  std::size_t exact_mismatch = 0;
  for (int k = 0; k < c10_instances; ++k) {
    const std::size_t n = 2 + rng.index(40);
    const auto y = oracle::labels(rng, n);
    const auto s = oracle::grid_values(rng, n, 6);
    worst["auc"] = std::max(worst["auc"], std::abs(eval::auc(s, y) - oracle::auc(s, y)));
    std::vector<int> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = s[i] >= 0.5;
    exact_mismatch += eval::f1(p, y) != oracle::f1(p, y);

    std::vector<double> pr(n), tg(n);
    for (std::size_t i = 0; i < n; ++i) {
      tg[i] = rng.normal();
      pr[i] = tg[i] + rng.normal();
    }
    const auto r = eval::rmse_r2(pr, tg);
    const auto [rm, r2] = oracle::rmse_r2(pr, tg);
    worst["rmse"] = std::max(worst["rmse"], std::abs(r.rmse - rm));
    worst["r2"] = std::max(worst["r2"], std::abs(r.r2.value_or(NAN) - r2));

    const std::size_t d = 1 + rng.index(4);
    auto grid = [&](std::size_t rows) {
      Tensor t({rows, d});
      for (double& v : t.data()) v = static_cast<double>(rng.index(4));
      return t;
    };
    const Tensor sy = grid(1 + rng.index(12)), tr = grid(1 + rng.index(12)), te = grid(1 + rng.index(12));
    exact_mismatch += eval::ndcr(sy, tr, te).ndcr != oracle::ndcr(sy, tr, te);

    const auto a = oracle::grid_values(rng, 1 + rng.index(30), 8), b = oracle::grid_values(rng, 1 + rng.index(30), 8);
    worst["ks"] = std::max(worst["ks"], std::abs(eval::ks_statistic(a, b) - oracle::ks(a, b)));
    const std::size_t na = 1 + rng.index(30), nb = 1 + rng.index(30);
    const auto wa = oracle::words(rng, na, 4), wb = oracle::words(rng, nb, 5);
    worst["tvd"] = std::max(worst["tvd"], std::abs(eval::tvd(wa, wb) - oracle::tvd(wa, wb)));
    const auto xa = oracle::words(rng, na, 3), xb = oracle::words(rng, nb, 3);
    worst["contingency"] = std::max(worst["contingency"], std::abs(eval::contingency_similarity(wa, xa, wb, xb) -
                                                                   oracle::contingency(wa, xa, wb, xb)));
  }
  bool ok = exact_mismatch == 0;
  std::string detail = "exact mismatches (F1, NDCR)=" + std::to_string(exact_mismatch);
  for (const auto& [k, v] : worst) {
    ok &= v <= c10_tol;
    detail += " " + k + "=" + fmt(v, 2);
  }
  return {ok, detail};
}

// --- 11 ----------------------------------------------------------------------

Result ndcr_sanity() {
  nd::RngStream rng(1111);
  const Tensor train = nd::sample_normal(rng, {40, 4}), test = nd::sample_normal(rng, {40, 4});
  const double copies = eval::ndcr(train, train, test).ndcr;
  // Half the synthetic rows copy training rows, half copy test rows.
  const Tensor half = nd::vstack(std::vector<Tensor>{train.slice_rows(0, 20), test.slice_rows(0, 20)});
  const double symmetric = eval::ndcr(half, train, test).ndcr;
  return {copies == 0.5 && symmetric == 0.0, "copies=" + fmt(copies, 17) + " symmetric=" + fmt(symmetric, 17)};
}

// --- 12 ----------------------------------------------------------------------

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result determinism() {
  const fs::path root = fs::temp_directory_path() / "ctrtab_acceptance_12";
  fs::remove_all(root);
  auto run_pipeline = [&](const fs::path& out) {
    fs::create_directories(out);
    auto write = [&](const std::string& name, const nlohmann::json& j) {
      std::ofstream(out / name) << j.dump(2);
      return out / name;
    };
    const auto gen = write("gen.json", {{"seed", 12}, {"generator", "mixture"}, {"synth", {{"n_rows", c7_rows}}}});
    const auto tr = write("train.json", {{"seed", 12}, {"profile", "desk"}});
    const auto sm = write("sample.json", {{"sample", {{"seed", 13}}}});
    const auto ev = write("eval.json", nlohmann::json::object());
    std::ostringstream log, err;
    int rc = 0;
    for (const auto& [cmd, cfg, stage] :
         std::vector<std::tuple<std::string, fs::path, std::optional<std::string>>>{{"gen", gen, {}},
                                                                                    {"train", tr, "denoiser"},
                                                                                    {"train", tr, "control"},
                                                                                    {"sample", sm, {}},
                                                                                    {"eval", ev, {}}}) {
      cli::Invocation inv{cmd, cfg, out, stage, {}};
      rc |= cli::run(inv, log, err);
    }
    if (rc) std::cerr << err.str();
    return rc;
  };
  if (run_pipeline(root / "a") || run_pipeline(root / "b")) return {false, "pipeline failed"};
  const bool syn = bytes(root / "a/synthetic.csv") == bytes(root / "b/synthetic.csv");
  const bool met = bytes(root / "a/metrics.json") == bytes(root / "b/metrics.json");
  const bool ckpt = bytes(root / "a/ctrtab.ckpt") == bytes(root / "b/ctrtab.ckpt");
  std::ostringstream rewritten;
  train::write_checkpoint(rewritten, train::load_checkpoint(root / "a/ctrtab.ckpt"));
  const bool round_trip = rewritten.str() == bytes(root / "a/ctrtab.ckpt");
  fs::remove_all(root);
  return {syn && met && ckpt && round_trip, std::string("synthetic.csv ") + (syn ? "identical" : "DIFFERS") +
                                                ", metrics.json " + (met ? "identical" : "DIFFERS") + ", ctrtab.ckpt " +
                                                (ckpt ? "identical" : "DIFFERS") + ", checkpoint reload+rewrite " +
                                                (round_trip ? "identical" : "DIFFERS")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Result()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "zero-init identity", zero_init_identity},
      {2, "linear probe gap equals eta^2 ||W||_F^2", linear_gap},
      {3, "SiLU probe eta^2 scaling and reg term", silu_scaling},
      {4, "forward-process moments", forward_moments},
      {5, "exact-noise chain inversion", chain_inversion},
      {6, "full loss gradient vs finite differences", gradient_check},
      {7, "toy mixture fidelity", toy_fidelity},
      {8, "F1 gap across dimensions (dims 10/50/100)", figure1_analogue},
      {9, "noise-scale convergence", noise_convergence},
      {10, "metric oracles", metric_oracles},
      {11, "NDCR sanity", ndcr_sanity},
      {12, "determinism and checkpoint round trip", determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::stoi(argv[i]));
  int failed = 0;
  for (const auto& c : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %s: %s | %s | %.1fs\n", c.id, r.pass ? "PASS" : "FAIL", c.name, r.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !r.pass;
  }
  return failed ? 1 : 0;
}
