#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ctrtab/nd/rng.hpp"
#include "ctrtab/nd/tape.hpp"
#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::net {

struct TimeEmbedConfig {
  std::size_t dim = 64;  // must be even
  double max_period = 10000.0;

  void validate() const;
  friend bool operator==(const TimeEmbedConfig&, const TimeEmbedConfig&) = default;
};

// [sin(t w_0..w_{k-1}), cos(t w_0..w_{k-1})] with w_j = max_period^(-j/(k-1)),
// k = dim/2. One row per timestep.
nd::Tensor sin_time_embed(double t, const TimeEmbedConfig& config);
nd::Tensor sin_time_embed(std::span<const double> ts, const TimeEmbedConfig& config);

// Dense layer parameters: weight (in x out), bias (1 x out).
struct Dense {
  nd::Tensor weight;
  nd::Tensor bias;

  std::size_t in() const noexcept { return weight.rows(); }
  std::size_t out() const noexcept { return weight.cols(); }
  friend bool operator==(const Dense&, const Dense&) = default;
};

Dense zero_dense(std::size_t in, std::size_t out);
// He-style init: weight ~ N(0, 2 / in), bias = 0.
Dense he_dense(nd::RngStream& rng, std::size_t in, std::size_t out);

struct NamedTensor {
  std::string name;
  nd::Tensor* tensor;
};
struct ConstNamedTensor {
  std::string name;
  const nd::Tensor* tensor;
};

// eps_theta(x_t, t): time MLP, input projection, three SiLU hidden layers and
// an output projection. Blocks: encoder = input + hidden1, mid = hidden2,
// decoder = hidden3 + output.
struct DenoiserParams {
  std::size_t dim = 0;
  std::size_t hidden = 0;
  TimeEmbedConfig time;

  Dense time1;  // time.dim -> hidden
  Dense time2;  // hidden -> hidden
  Dense input;  // dim -> hidden
  Dense hidden1;
  Dense hidden2;
  Dense hidden3;
  Dense output;  // hidden -> dim

  std::vector<NamedTensor> named();
  std::vector<ConstNamedTensor> named() const;
  std::size_t parameter_count() const;
  // Throws DimensionError if any layer shape disagrees with dim / hidden.
  void validate() const;

  friend bool operator==(const DenoiserParams&, const DenoiserParams&) = default;
};

DenoiserParams init_params(nd::RngStream& rng, std::size_t dim, std::size_t hidden, const TimeEmbedConfig& time = {});
DenoiserParams zero_params(std::size_t dim, std::size_t hidden, const TimeEmbedConfig& time = {});

struct BoundDense {
  nd::Var weight;
  nd::Var bias;
};

BoundDense bind(nd::Tape& tape, const Dense& layer, bool trainable);
nd::Var apply(const nd::Var& x, const BoundDense& layer);

struct BoundDenoiser {
  const DenoiserParams* params = nullptr;
  BoundDense time1, time2, input, hidden1, hidden2, hidden3, output;

  // Leaves in DenoiserParams::named() order.
  std::vector<nd::Var> vars() const;
};

// trainable = false binds every tensor as a tape constant (frozen).
BoundDenoiser bind(nd::Tape& tape, const DenoiserParams& params, bool trainable);

// Inverted dropout on hidden activations; inactive when rate == 0 or rng null.
struct ForwardOptions {
  double dropout = 0.0;
  nd::RngStream* rng = nullptr;
};

nd::Var maybe_dropout(const nd::Var& h, const ForwardOptions& options);

// Linear(SiLU(Linear(embed)))
nd::Var time_mlp(const nd::Var& embed, const BoundDenoiser& net);

struct HiddenTrace {
  nd::Var t_emb;
  nd::Var x_left;  // input(x_t) + t_emb
  nd::Var h1;      // encoder block output
  nd::Var h_left;  // mid block output; the fusion point
  nd::Var h3;      // decoder hidden, pre-output activation
};

struct DenoiseOutput {
  nd::Var eps;
  HiddenTrace trace;
};

// Encoder and mid blocks from x_left.
nd::Var encoder_mid(const nd::Var& x_left, const BoundDense& hidden1, const BoundDense& hidden2,
                    const ForwardOptions& options, nd::Var* h1_out = nullptr);
// Decoder block from the (possibly fused) mid activation.
nd::Var decoder(const nd::Var& h_fusion, const BoundDenoiser& net, const ForwardOptions& options,
                nd::Var* h3_out = nullptr);

// embed: sin_time_embed rows, one per row of x_t.
DenoiseOutput denoise_forward(const nd::Var& x_t, const nd::Var& embed, const BoundDenoiser& net,
                              const ForwardOptions& options = {});

// Tape-free convenience for inference.
nd::Tensor denoise(const nd::Tensor& x_t, std::span<const double> t, const DenoiserParams& params);

nlohmann::json shapes_json(const std::vector<ConstNamedTensor>& tensors);

}  // namespace ctrtab::net
