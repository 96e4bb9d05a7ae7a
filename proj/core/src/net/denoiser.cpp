#include "ctrtab/net/denoiser.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "ctrtab/error.hpp"
#include "ctrtab/nd/ops.hpp"

namespace ctrtab::net {

using nd::Tensor;
using nd::Var;

void TimeEmbedConfig::validate() const {
  if (dim == 0 || dim % 2 != 0) throw DomainError("time embedding dimension must be positive and even, got " + std::to_string(dim));
  if (!(max_period > 1.0)) throw DomainError("time embedding max_period must exceed 1");
}

Tensor sin_time_embed(double t, const TimeEmbedConfig& config) {
  const double ts[1] = {t};
  return sin_time_embed(ts, config);
}

Tensor sin_time_embed(std::span<const double> ts, const TimeEmbedConfig& config) {
  config.validate();
  const std::size_t half = config.dim / 2;
  std::vector<double> freq(half, 1.0);
  for (std::size_t j = 1; j < half; ++j)
    freq[j] = std::pow(config.max_period, -static_cast<double>(j) / static_cast<double>(half - 1));
  Tensor out = Tensor::zeros(ts.size(), config.dim);
  for (std::size_t r = 0; r < ts.size(); ++r) {
    if (!(ts[r] >= 0.0)) throw DomainError("time embedding: t must be non-negative");
    for (std::size_t j = 0; j < half; ++j) {
      out(r, j) = std::sin(ts[r] * freq[j]);
      out(r, half + j) = std::cos(ts[r] * freq[j]);
    }
  }
  return out;
}

Dense zero_dense(std::size_t in, std::size_t out) { return {Tensor::zeros(in, out), Tensor::zeros(1, out)}; }

Dense he_dense(nd::RngStream& rng, std::size_t in, std::size_t out) {
  Dense d = zero_dense(in, out);
  const double sd = std::sqrt(2.0 / static_cast<double>(in));
  for (auto& w : d.weight.data()) w = sd * rng.normal();
  return d;
}

std::vector<NamedTensor> DenoiserParams::named() {
  return {{"time1.weight", &time1.weight},     {"time1.bias", &time1.bias},
          {"time2.weight", &time2.weight},     {"time2.bias", &time2.bias},
          {"input.weight", &input.weight},     {"input.bias", &input.bias},
          {"hidden1.weight", &hidden1.weight}, {"hidden1.bias", &hidden1.bias},
          {"hidden2.weight", &hidden2.weight}, {"hidden2.bias", &hidden2.bias},
          {"hidden3.weight", &hidden3.weight}, {"hidden3.bias", &hidden3.bias},
          {"output.weight", &output.weight},   {"output.bias", &output.bias}};
}

std::vector<ConstNamedTensor> DenoiserParams::named() const {
  std::vector<ConstNamedTensor> out;
  for (auto& [name, t] : const_cast<DenoiserParams*>(this)->named()) out.push_back({name, t});
  return out;
}

std::size_t DenoiserParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& nt : named()) n += nt.tensor->size();
  return n;
}

namespace {

void check_dense(const Dense& d, std::size_t in, std::size_t out, const char* name) {
  if (d.weight.shape() != nd::Shape{in, out} || d.bias.shape() != nd::Shape{1, out}) {
    throw DimensionError(std::string("denoiser layer ") + name + ": expected " + std::to_string(in) + "x" +
                         std::to_string(out) + ", got " + nd::to_string(d.weight.shape()));
  }
}

}  // namespace

void DenoiserParams::validate() const {
  if (dim == 0 || hidden == 0) throw DimensionError("denoiser: dim and hidden must be positive");
  time.validate();
  check_dense(time1, time.dim, hidden, "time1");
  check_dense(time2, hidden, hidden, "time2");
  check_dense(input, dim, hidden, "input");
  check_dense(hidden1, hidden, hidden, "hidden1");
  check_dense(hidden2, hidden, hidden, "hidden2");
  check_dense(hidden3, hidden, hidden, "hidden3");
  check_dense(output, hidden, dim, "output");
}

DenoiserParams init_params(nd::RngStream& rng, std::size_t dim, std::size_t hidden, const TimeEmbedConfig& time) {
  if (dim == 0 || hidden == 0) throw DomainError("init_params: dim and hidden must be at least 1");
  time.validate();
  DenoiserParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.time = time;
  p.time1 = he_dense(rng, time.dim, hidden);
  p.time2 = he_dense(rng, hidden, hidden);
  p.input = he_dense(rng, dim, hidden);
  p.hidden1 = he_dense(rng, hidden, hidden);
  p.hidden2 = he_dense(rng, hidden, hidden);
  p.hidden3 = he_dense(rng, hidden, hidden);
  p.output = he_dense(rng, hidden, dim);
  return p;
}

DenoiserParams zero_params(std::size_t dim, std::size_t hidden, const TimeEmbedConfig& time) {
  time.validate();
  DenoiserParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.time = time;
  p.time1 = zero_dense(time.dim, hidden);
  p.time2 = zero_dense(hidden, hidden);
  p.input = zero_dense(dim, hidden);
  p.hidden1 = zero_dense(hidden, hidden);
  p.hidden2 = zero_dense(hidden, hidden);
  p.hidden3 = zero_dense(hidden, hidden);
  p.output = zero_dense(hidden, dim);
  return p;
}

BoundDense bind(nd::Tape& tape, const Dense& layer, bool trainable) {
  if (trainable) return {tape.leaf(layer.weight), tape.leaf(layer.bias)};
  return {tape.constant(layer.weight), tape.constant(layer.bias)};
}

Var apply(const Var& x, const BoundDense& layer) { return nd::linear(x, layer.weight, layer.bias); }

std::vector<Var> BoundDenoiser::vars() const {
  return {time1.weight,   time1.bias,   time2.weight,   time2.bias,   input.weight,
          input.bias,     hidden1.weight, hidden1.bias, hidden2.weight, hidden2.bias,
          hidden3.weight, hidden3.bias, output.weight,  output.bias};
}

BoundDenoiser bind(nd::Tape& tape, const DenoiserParams& params, bool trainable) {
  params.validate();
  BoundDenoiser b;
  b.params = &params;
  b.time1 = bind(tape, params.time1, trainable);
  b.time2 = bind(tape, params.time2, trainable);
  b.input = bind(tape, params.input, trainable);
  b.hidden1 = bind(tape, params.hidden1, trainable);
  b.hidden2 = bind(tape, params.hidden2, trainable);
  b.hidden3 = bind(tape, params.hidden3, trainable);
  b.output = bind(tape, params.output, trainable);
  return b;
}

Var maybe_dropout(const Var& h, const ForwardOptions& options) {
  if (options.dropout <= 0.0 || options.rng == nullptr) return h;
  if (options.dropout >= 1.0) throw DomainError("dropout rate must lie in [0, 1)");
  const double keep = 1.0 - options.dropout;
  Tensor mask(h.shape());
  for (auto& m : mask.data()) m = options.rng->uniform() < keep ? 1.0 / keep : 0.0;
  return nd::mul(h, h.tape()->constant(std::move(mask)));
}

Var time_mlp(const Var& embed, const BoundDenoiser& net) {
  if (embed.cols() != net.params->time.dim) {
    throw DimensionError("time_mlp: embedding width " + std::to_string(embed.cols()) + " != " +
                         std::to_string(net.params->time.dim));
  }
  return apply(nd::silu(apply(embed, net.time1)), net.time2);
}

Var encoder_mid(const Var& x_left, const BoundDense& hidden1, const BoundDense& hidden2, const ForwardOptions& options,
                Var* h1_out) {
  Var h1 = maybe_dropout(nd::silu(apply(x_left, hidden1)), options);
  if (h1_out) *h1_out = h1;
  return maybe_dropout(nd::silu(apply(h1, hidden2)), options);
}

Var decoder(const Var& h_fusion, const BoundDenoiser& net, const ForwardOptions& options, Var* h3_out) {
  Var h3 = maybe_dropout(nd::silu(apply(h_fusion, net.hidden3)), options);
  if (h3_out) *h3_out = h3;
  return apply(h3, net.output);
}

DenoiseOutput denoise_forward(const Var& x_t, const Var& embed, const BoundDenoiser& net,
                              const ForwardOptions& options) {
  if (x_t.cols() != net.params->dim) {
    throw DimensionError("denoise_forward: input width " + std::to_string(x_t.cols()) + " != " +
                         std::to_string(net.params->dim));
  }
  if (embed.rows() != x_t.rows()) throw DimensionError("denoise_forward: one time embedding row per input row");
  DenoiseOutput out;
  out.trace.t_emb = time_mlp(embed, net);
  out.trace.x_left = nd::add(apply(x_t, net.input), out.trace.t_emb);
  out.trace.h_left = encoder_mid(out.trace.x_left, net.hidden1, net.hidden2, options, &out.trace.h1);
  out.eps = decoder(out.trace.h_left, net, options, &out.trace.h3);
  return out;
}

Tensor denoise(const Tensor& x_t, std::span<const double> t, const DenoiserParams& params) {
  nd::Tape tape;
  const BoundDenoiser net = bind(tape, params, false);
  const Var x = tape.constant(x_t);
  const Var e = tape.constant(sin_time_embed(t, params.time));
  return denoise_forward(x, e, net).eps.value();
}

nlohmann::json shapes_json(const std::vector<ConstNamedTensor>& tensors) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& nt : tensors) out.push_back({{"name", nt.name}, {"shape", nt.tensor->shape()}});
  return out;
}

}  // namespace ctrtab::net
