#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrtab/net/control.hpp"
#include "ctrtab/train/adamw.hpp"

namespace ctrtab::train {

enum class Stage { denoiser, control, joint };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

struct TrainConfig {
  std::size_t steps = 30000;
  std::size_t batch = 256;
  std::size_t timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  double ve_sigma_min = 0.01;
  double ve_sigma_max = 20.0;
  std::size_t ve_steps = 100;
  std::size_t hidden = 256;
  std::size_t time_dim = 64;
  AdamWConfig optimizer;
  double b = 0.005;
  double dropout = 0.0;
  net::BundleFlags flags;
  std::uint64_t seed = 0;
  Stage stage = Stage::denoiser;

  static TrainConfig paper();
  // T = 200, 3000 steps, H = 128.
  static TrainConfig desk();
  static TrainConfig profile(std::string_view name);

  void validate() const;
  nlohmann::json to_json() const;
  // Overlays the keys of j onto base; unknown keys throw ConfigError.
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base);
  static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig{}); }

  diffusion::DdpmSchedule ddpm_schedule() const;
  diffusion::VeSchedule ve_schedule() const;
};

struct Batch {
  std::vector<std::size_t> rows;
  nd::Tensor x0;
  std::vector<double> t;  // integer steps for DDPM, (0, 1] for VE
  nd::Tensor eps;
  nd::Tensor x_t;
  nd::Tensor embed;  // sinusoidal features of the network time input
};

// Rows from the data stream, t and eps from the noise stream. The effective
// batch is min(batch, rows).
Batch draw_batch(const nd::Tensor& data, std::size_t batch, const net::ModelBundle& bundle, nd::Rng& rng);

// Rebuilds x_t / embed of a batch from (x0, t, eps).
void perturb(Batch& batch, const net::ModelBundle& bundle);

// Mean squared noise-prediction error on one batch; c_f null selects the bare
// denoiser.
double batch_loss(const net::ModelBundle& bundle, const Batch& batch, const nd::Tensor* c_f);

struct TrainResult {
  net::ModelBundle bundle;
  std::vector<double> losses;
};

using StepCallback = std::function<void(std::size_t step, double loss)>;

// Fresh bundle with He-initialized denoiser and the config's schedules.
net::ModelBundle initial_bundle(std::size_t dim, const data::EncoderState& encoder, const TrainConfig& config);

// Stage 1: denoiser only.
TrainResult train_denoiser(const nd::Tensor& data, const data::EncoderState& encoder, const TrainConfig& config,
                           const StepCallback& on_step = {});

// Stage 2: attaches a zero-initialized control branch to a trained denoiser
// (or continues an attached one) and updates only the control parameters.
TrainResult train_control(const nd::Tensor& data, net::ModelBundle bundle, const TrainConfig& config,
                          const StepCallback& on_step = {});

// Single stage, every parameter updated.
TrainResult train_joint(const nd::Tensor& data, const data::EncoderState& encoder, const TrainConfig& config,
                        const StepCallback& on_step = {});

}  // namespace ctrtab::train
