#include "ctrtab/train/trainer.hpp"

#include <cmath>

#include "ctrtab/error.hpp"
#include "ctrtab/nd/ops.hpp"

namespace ctrtab::train {

using nd::Tensor;
using nd::Var;
using nlohmann::json;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::denoiser: return "denoiser";
    case Stage::control: return "control";
    case Stage::joint: return "joint";
  }
  return "denoiser";
}

Stage stage_from_string(std::string_view s) {
  if (s == "denoiser") return Stage::denoiser;
  if (s == "control") return Stage::control;
  if (s == "joint") return Stage::joint;
  throw ConfigError("unknown stage '" + std::string(s) + "' (expected denoiser, control or joint)");
}

TrainConfig TrainConfig::paper() { return TrainConfig{}; }

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.timesteps = 200;
  c.steps = 3000;
  c.hidden = 128;
  return c;
}

TrainConfig TrainConfig::profile(std::string_view name) {
  if (name == "paper") return paper();
  if (name == "desk") return desk();
  throw ConfigError("unknown profile '" + std::string(name) + "' (expected paper or desk)");
}

void TrainConfig::validate() const {
  if (steps < 1) throw ConfigError("train: steps must be at least 1");
  if (batch < 1) throw ConfigError("train: batch must be at least 1");
  if (hidden < 1) throw ConfigError("train: hidden must be at least 1");
  if (!(b >= 0.0)) throw ConfigError("train: b must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("train: dropout must lie in [0, 1)");
  optimizer.validate();
  try {
    net::TimeEmbedConfig{time_dim}.validate();
    (void)ddpm_schedule();
    (void)ve_schedule();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
}

diffusion::DdpmSchedule TrainConfig::ddpm_schedule() const {
  return diffusion::DdpmSchedule::linear(timesteps, beta_start, beta_end);
}

diffusion::VeSchedule TrainConfig::ve_schedule() const {
  return diffusion::VeSchedule(ve_sigma_min, ve_sigma_max, ve_steps);
}

json TrainConfig::to_json() const {
  return json{{"steps", steps},
              {"batch", batch},
              {"timesteps", timesteps},
              {"beta_start", beta_start},
              {"beta_end", beta_end},
              {"ve_sigma_min", ve_sigma_min},
              {"ve_sigma_max", ve_sigma_max},
              {"ve_steps", ve_steps},
              {"hidden", hidden},
              {"time_dim", time_dim},
              {"lr", optimizer.lr},
              {"beta1", optimizer.beta1},
              {"beta2", optimizer.beta2},
              {"adam_eps", optimizer.eps},
              {"weight_decay", optimizer.weight_decay},
              {"b", b},
              {"dropout", dropout},
              {"use_last_fusion", flags.use_last_fusion},
              {"noise_type", net::to_string(flags.noise_type)},
              {"zero_conv", net::to_string(flags.zero_conv)},
              {"sigma", flags.sigma == diffusion::SigmaKind::posterior ? "posterior" : "beta"},
              {"process", net::to_string(flags.process)},
              {"seed", seed},
              {"stage", to_string(stage)}};
}

TrainConfig TrainConfig::from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "steps") c.steps = v.get<std::size_t>();
      else if (key == "batch") c.batch = v.get<std::size_t>();
      else if (key == "timesteps") c.timesteps = v.get<std::size_t>();
      else if (key == "beta_start") c.beta_start = v.get<double>();
      else if (key == "beta_end") c.beta_end = v.get<double>();
      else if (key == "ve_sigma_min") c.ve_sigma_min = v.get<double>();
      else if (key == "ve_sigma_max") c.ve_sigma_max = v.get<double>();
      else if (key == "ve_steps") c.ve_steps = v.get<std::size_t>();
      else if (key == "hidden") c.hidden = v.get<std::size_t>();
      else if (key == "time_dim") c.time_dim = v.get<std::size_t>();
      else if (key == "lr") c.optimizer.lr = v.get<double>();
      else if (key == "beta1") c.optimizer.beta1 = v.get<double>();
      else if (key == "beta2") c.optimizer.beta2 = v.get<double>();
      else if (key == "adam_eps") c.optimizer.eps = v.get<double>();
      else if (key == "weight_decay") c.optimizer.weight_decay = v.get<double>();
      else if (key == "b") c.b = v.get<double>();
      else if (key == "dropout") c.dropout = v.get<double>();
      else if (key == "use_last_fusion") c.flags.use_last_fusion = v.get<bool>();
      else if (key == "noise_type") c.flags.noise_type = net::noise_type_from_string(v.get<std::string>());
      else if (key == "zero_conv") c.flags.zero_conv = net::zero_conv_kind_from_string(v.get<std::string>());
      else if (key == "sigma") {
        const auto s = v.get<std::string>();
        if (s == "posterior") c.flags.sigma = diffusion::SigmaKind::posterior;
        else if (s == "beta") c.flags.sigma = diffusion::SigmaKind::beta;
        else throw ConfigError("train: unknown sigma '" + s + "' (expected posterior or beta)");
      } else if (key == "process") c.flags.process = net::process_from_string(v.get<std::string>());
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "stage") c.stage = stage_from_string(v.get<std::string>());
      else throw ConfigError("train: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  c.validate();
  return c;
}

void perturb(Batch& bt, const net::ModelBundle& bundle) {
  const std::size_t n = bt.x0.rows();
  bt.x_t = bt.x0;
  std::vector<double> model_t(n);
  for (std::size_t i = 0; i < n; ++i) {
    double coef_x = 1.0, coef_e = 0.0;
    if (bundle.flags.process == net::Process::ddpm) {
      const double ab = bundle.ddpm.alpha_bar(static_cast<std::size_t>(bt.t[i]));
      coef_x = std::sqrt(ab);
      coef_e = std::sqrt(1.0 - ab);
    } else {
      coef_e = bundle.ve.sigma(bt.t[i]);
    }
    auto xt = bt.x_t.row_span(i);
    const auto x0 = bt.x0.row_span(i);
    const auto e = bt.eps.row_span(i);
    for (std::size_t c = 0; c < xt.size(); ++c) xt[c] = coef_x * x0[c] + coef_e * e[c];
    model_t[i] = net::model_time(bundle.flags.process, bt.t[i]);
  }
  bt.embed = net::sin_time_embed(model_t, bundle.denoiser.time);
}

Batch draw_batch(const Tensor& data, std::size_t batch, const net::ModelBundle& bundle, nd::Rng& rng) {
  if (data.rows() == 0) throw DataError("training data is empty");
  const std::size_t n = std::min(batch, data.rows());
  Batch bt;
  bt.rows.resize(n);
  for (auto& r : bt.rows) r = rng.data().index(data.rows());
  bt.x0 = data.select_rows(bt.rows);
  bt.t.resize(n);
  if (bundle.flags.process == net::Process::ddpm) {
    const std::size_t T = bundle.ddpm.steps();
    for (auto& t : bt.t) t = static_cast<double>(1 + rng.noise().index(T));
  } else {
    for (auto& t : bt.t) t = rng.noise().uniform_open();
  }
  bt.eps = nd::sample_normal(rng.noise(), bt.x0.shape());
  perturb(bt, bundle);
  return bt;
}

double batch_loss(const net::ModelBundle& bundle, const Batch& bt, const Tensor* c_f) {
  nd::Tape tape;
  const auto net = net::bind(tape, bundle.denoiser, false);
  const Var x = tape.constant(bt.x_t);
  const Var e = tape.constant(bt.embed);
  Var pred;
  if (bundle.has_control() && c_f != nullptr) {
    const auto ctrl = net::bind(tape, *bundle.control, false);
    pred = net::fused_forward(x, e, tape.constant(*c_f), net, ctrl, bundle.flags.use_last_fusion).eps;
  } else {
    pred = net::denoise_forward(x, e, net).eps;
  }
  return nd::mse(pred, tape.constant(bt.eps)).value().item();
}

net::ModelBundle initial_bundle(std::size_t dim, const data::EncoderState& encoder, const TrainConfig& config) {
  config.validate();
  nd::Rng rng(config.seed);
  net::ModelBundle b;
  b.denoiser = net::init_params(rng.init(), dim, config.hidden, net::TimeEmbedConfig{config.time_dim});
  b.ddpm = config.ddpm_schedule();
  b.ve = config.ve_schedule();
  b.encoder = encoder;
  b.flags = config.flags;
  b.config = config.to_json();
  return b;
}

namespace {

struct LoopSpec {
  bool update_denoiser = false;
  bool use_control = false;
};

// Shared loop for every stage. Batches come from the data and noise streams,
// so the init stream consumed by initialization never shifts them.
std::vector<double> run_loop(const Tensor& data, net::ModelBundle& bundle, const TrainConfig& config, LoopSpec spec,
                             const StepCallback& on_step) {
  if (data.cols() != bundle.denoiser.dim) {
    throw DimensionError("training data width " + std::to_string(data.cols()) + " != model dim " +
                         std::to_string(bundle.denoiser.dim));
  }
  if (!nd::all_finite(data)) throw DataError("training data contains non-finite values");
  nd::Rng rng(config.seed);
  nd::RngStream dropout_rng(nd::derive_seed(config.seed, 0xd0));
  const net::ForwardOptions options{config.dropout, config.dropout > 0.0 ? &dropout_rng : nullptr};

  std::vector<Tensor*> params;
  if (spec.update_denoiser)
    for (auto& nt : bundle.denoiser.named()) params.push_back(nt.tensor);
  if (spec.use_control)
    for (auto& nt : bundle.control->named()) params.push_back(nt.tensor);
  AdamWState state = AdamWState::for_params(config.optimizer, params);

  std::vector<double> losses;
  losses.reserve(config.steps);
  for (std::size_t step = 0; step < config.steps; ++step) {
    const Batch bt = draw_batch(data, config.batch, bundle, rng);
    Tensor c_f;
    if (spec.use_control) c_f = net::make_condition(bt.x0, bundle.control->b, bundle.flags.noise_type, rng.data());

    nd::Tape tape;
    const auto net = net::bind(tape, bundle.denoiser, spec.update_denoiser);
    const Var x = tape.constant(bt.x_t);
    const Var e = tape.constant(bt.embed);
    std::vector<Var> vars;
    if (spec.update_denoiser) vars = net.vars();
    Var pred;
    if (spec.use_control) {
      const auto ctrl = net::bind(tape, *bundle.control, true);
      const auto cv = ctrl.vars();
      vars.insert(vars.end(), cv.begin(), cv.end());
      pred = net::fused_forward(x, e, tape.constant(c_f), net, ctrl, bundle.flags.use_last_fusion, options).eps;
    } else {
      pred = net::denoise_forward(x, e, net, options).eps;
    }
    const Var loss = nd::mse(pred, tape.constant(bt.eps));
    const double lv = loss.value().item();
    if (!std::isfinite(lv)) throw TrainingAbort("non-finite loss at step " + std::to_string(step + 1));
    const nd::Gradients grads = tape.backward(loss);
    std::vector<Tensor> g;
    g.reserve(vars.size());
    for (const auto& v : vars) g.push_back(grads.wrt(v));
    adamw_step(params, g, state);
    losses.push_back(lv);
    if (on_step) on_step(step + 1, lv);
  }
  return losses;
}

}  // namespace

TrainResult train_denoiser(const Tensor& data, const data::EncoderState& encoder, const TrainConfig& config,
                           const StepCallback& on_step) {
  TrainResult r;
  r.bundle = initial_bundle(data.cols(), encoder, config);
  r.losses = run_loop(data, r.bundle, config, {true, false}, on_step);
  return r;
}

TrainResult train_control(const Tensor& data, net::ModelBundle bundle, const TrainConfig& config,
                          const StepCallback& on_step) {
  config.validate();
  bundle.denoiser.validate();
  if (!bundle.has_control()) bundle.control = net::attach_control(bundle.denoiser, config.b, config.flags.zero_conv);
  bundle.flags.use_last_fusion = config.flags.use_last_fusion;
  bundle.flags.noise_type = config.flags.noise_type;
  bundle.config["control"] = config.to_json();
  const net::DenoiserParams before = bundle.denoiser;
  TrainResult r;
  r.losses = run_loop(data, bundle, config, {false, true}, on_step);
  if (!(bundle.denoiser == before)) throw Error("internal: stage-2 training mutated the frozen denoiser");
  r.bundle = std::move(bundle);
  return r;
}

TrainResult train_joint(const Tensor& data, const data::EncoderState& encoder, const TrainConfig& config,
                        const StepCallback& on_step) {
  TrainResult r;
  r.bundle = initial_bundle(data.cols(), encoder, config);
  r.bundle.control = net::attach_control(r.bundle.denoiser, config.b, config.flags.zero_conv);
  r.losses = run_loop(data, r.bundle, config, {true, true}, on_step);
  return r;
}

}  // namespace ctrtab::train
