#include "ctrtab/net/control.hpp"

#include <cmath>

#include "ctrtab/error.hpp"
#include "ctrtab/nd/ops.hpp"

namespace ctrtab::net {

using nd::Tensor;
using nd::Var;

std::string_view to_string(ZeroConvKind k) { return k == ZeroConvKind::dense ? "dense" : "elementwise"; }

std::string_view to_string(NoiseType n) {
  switch (n) {
    case NoiseType::laplace: return "laplace";
    case NoiseType::gaussian: return "gaussian";
    case NoiseType::uniform: return "uniform";
  }
  return "laplace";
}

std::string_view to_string(Process p) { return p == Process::ddpm ? "ddpm" : "ve"; }

ZeroConvKind zero_conv_kind_from_string(std::string_view s) {
  if (s == "dense") return ZeroConvKind::dense;
  if (s == "elementwise") return ZeroConvKind::elementwise;
  throw ConfigError("unknown zero_conv kind '" + std::string(s) + "'");
}

NoiseType noise_type_from_string(std::string_view s) {
  if (s == "laplace") return NoiseType::laplace;
  if (s == "gaussian") return NoiseType::gaussian;
  if (s == "uniform") return NoiseType::uniform;
  throw ConfigError("unknown noise_type '" + std::string(s) + "'");
}

Process process_from_string(std::string_view s) {
  if (s == "ddpm") return Process::ddpm;
  if (s == "ve") return Process::ve;
  throw ConfigError("unknown process '" + std::string(s) + "'");
}

Tensor make_condition(const Tensor& x0, double b, NoiseType type, nd::RngStream& rng) {
  if (!(b >= 0.0)) throw DomainError("make_condition: b must be non-negative");
  Tensor c = x0;
  if (b == 0.0) return c;
  switch (type) {
    case NoiseType::laplace:
      for (auto& v : c.data()) v += rng.laplace(b);
      break;
    case NoiseType::gaussian: {
      const double sd = std::sqrt(2.0) * b;
      for (auto& v : c.data()) v += sd * rng.normal();
      break;
    }
    case NoiseType::uniform: {
      const double half = std::sqrt(6.0) * b;
      for (auto& v : c.data()) v += half * (2.0 * rng.uniform() - 1.0);
      break;
    }
  }
  return c;
}

ZeroConv zero_conv(ZeroConvKind kind, std::size_t in, std::size_t out) {
  ZeroConv z;
  z.kind = kind;
  if (kind == ZeroConvKind::dense) {
    z.weight = Tensor::zeros(in, out);
  } else {
    if (in != out) throw DimensionError("elementwise zero convolution needs equal widths");
    z.weight = Tensor::zeros(1, out);
  }
  z.bias = Tensor::zeros(1, out);
  return z;
}

std::vector<NamedTensor> ControlParams::named() {
  return {{"control.zc_in.weight", &zc_in.weight},     {"control.zc_in.bias", &zc_in.bias},
          {"control.input.weight", &input.weight},     {"control.input.bias", &input.bias},
          {"control.hidden1.weight", &hidden1.weight}, {"control.hidden1.bias", &hidden1.bias},
          {"control.hidden2.weight", &hidden2.weight}, {"control.hidden2.bias", &hidden2.bias},
          {"control.zc_mid.weight", &zc_mid.weight},   {"control.zc_mid.bias", &zc_mid.bias},
          {"control.zc_last.weight", &zc_last.weight}, {"control.zc_last.bias", &zc_last.bias}};
}

std::vector<ConstNamedTensor> ControlParams::named() const {
  std::vector<ConstNamedTensor> out;
  for (auto& [name, t] : const_cast<ControlParams*>(this)->named()) out.push_back({name, t});
  return out;
}

std::size_t ControlParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& nt : named()) n += nt.tensor->size();
  return n;
}

ControlParams attach_control(const DenoiserParams& denoiser, double b, ZeroConvKind kind) {
  denoiser.validate();
  if (!(b >= 0.0)) throw DomainError("attach_control: b must be non-negative");
  ControlParams c;
  c.zc_in = zero_conv(kind, denoiser.dim, denoiser.dim);
  c.input = denoiser.input;
  c.hidden1 = denoiser.hidden1;
  c.hidden2 = denoiser.hidden2;
  c.zc_mid = zero_conv(kind, denoiser.hidden, denoiser.hidden);
  c.zc_last = zero_conv(kind, denoiser.dim, denoiser.dim);
  c.b = b;
  return c;
}

nlohmann::json BundleFlags::to_json() const {
  return {{"use_last_fusion", use_last_fusion},
          {"noise_type", to_string(noise_type)},
          {"zero_conv", to_string(zero_conv)},
          {"sigma", sigma == diffusion::SigmaKind::posterior ? "posterior" : "beta"},
          {"process", to_string(process)}};
}

BundleFlags BundleFlags::from_json(const nlohmann::json& j) {
  BundleFlags f;
  f.use_last_fusion = j.at("use_last_fusion").get<bool>();
  f.noise_type = noise_type_from_string(j.at("noise_type").get<std::string>());
  f.zero_conv = zero_conv_kind_from_string(j.at("zero_conv").get<std::string>());
  const auto sigma = j.at("sigma").get<std::string>();
  if (sigma == "posterior") {
    f.sigma = diffusion::SigmaKind::posterior;
  } else if (sigma == "beta") {
    f.sigma = diffusion::SigmaKind::beta;
  } else {
    throw FormatError("unknown sigma kind '" + sigma + "'");
  }
  f.process = process_from_string(j.at("process").get<std::string>());
  return f;
}

double model_time(Process process, double t) { return process == Process::ddpm ? t : 1000.0 * t; }

Var apply(const Var& x, const BoundZeroConv& zc) {
  if (zc.kind == ZeroConvKind::dense) return nd::linear(x, zc.weight, zc.bias);
  return nd::add(nd::mul_row(x, zc.weight), zc.bias);
}

namespace {

BoundZeroConv bind_zc(nd::Tape& tape, const ZeroConv& zc, bool trainable) {
  if (trainable) return {zc.kind, tape.leaf(zc.weight), tape.leaf(zc.bias)};
  return {zc.kind, tape.constant(zc.weight), tape.constant(zc.bias)};
}

}  // namespace

std::vector<Var> BoundControl::vars() const {
  return {zc_in.weight,   zc_in.bias,   input.weight,  input.bias,  hidden1.weight, hidden1.bias,
          hidden2.weight, hidden2.bias, zc_mid.weight, zc_mid.bias, zc_last.weight, zc_last.bias};
}

BoundControl bind(nd::Tape& tape, const ControlParams& params, bool trainable) {
  BoundControl b;
  b.params = &params;
  b.zc_in = bind_zc(tape, params.zc_in, trainable);
  b.input = bind(tape, params.input, trainable);
  b.hidden1 = bind(tape, params.hidden1, trainable);
  b.hidden2 = bind(tape, params.hidden2, trainable);
  b.zc_mid = bind_zc(tape, params.zc_mid, trainable);
  b.zc_last = bind_zc(tape, params.zc_last, trainable);
  return b;
}

ControlOutput control_forward(const Var& x_t, const Var& t_emb, const Var& c_f, const BoundControl& control) {
  if (c_f.shape() != x_t.shape()) {
    throw DimensionError("control_forward: condition shape " + nd::to_string(c_f.shape()) + " != input shape " +
                         nd::to_string(x_t.shape()));
  }
  ControlOutput out;
  out.x_right = nd::add(apply(nd::add(apply(c_f, control.zc_in), x_t), control.input), t_emb);
  out.h_right = encoder_mid(out.x_right, control.hidden1, control.hidden2, ForwardOptions{});
  out.c_last = apply(c_f, control.zc_last);
  return out;
}

FusedOutput fused_forward(const Var& x_t, const Var& embed, const Var& c_f, const BoundDenoiser& net,
                          const BoundControl& control, bool use_last_fusion, const ForwardOptions& options) {
  if (x_t.cols() != net.params->dim) {
    throw DimensionError("fused_forward: input width " + std::to_string(x_t.cols()) + " != " +
                         std::to_string(net.params->dim));
  }
  if (embed.rows() != x_t.rows()) throw DimensionError("fused_forward: one time embedding row per input row");
  FusedOutput out;
  auto& tr = out.trace;
  tr.t_emb = time_mlp(embed, net);
  tr.x_left = nd::add(apply(x_t, net.input), tr.t_emb);
  tr.h_left = encoder_mid(tr.x_left, net.hidden1, net.hidden2, options, &tr.h1);
  out.control = control_forward(x_t, tr.t_emb, c_f, control);
  const Var h_fusion = nd::add(tr.h_left, apply(out.control.h_right, control.zc_mid));
  out.eps = decoder(h_fusion, net, options, &tr.h3);
  if (use_last_fusion) out.eps = nd::add(out.eps, out.control.c_last);
  return out;
}

Tensor predict_noise(const ModelBundle& bundle, const Tensor& x_t, std::span<const double> t, const Tensor* c_f) {
  nd::Tape tape;
  const BoundDenoiser net = bind(tape, bundle.denoiser, false);
  const Var x = tape.constant(x_t);
  const Var e = tape.constant(sin_time_embed(t, bundle.denoiser.time));
  if (!bundle.has_control() || c_f == nullptr) return denoise_forward(x, e, net).eps.value();
  const BoundControl ctrl = bind(tape, *bundle.control, false);
  return fused_forward(x, e, tape.constant(*c_f), net, ctrl, bundle.flags.use_last_fusion).eps.value();
}

}  // namespace ctrtab::net
