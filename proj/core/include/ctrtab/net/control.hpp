#pragma once

#include <optional>
#include <span>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ctrtab/data/encoder.hpp"
#include "ctrtab/diffusion/kernels.hpp"
#include "ctrtab/diffusion/schedule.hpp"
#include "ctrtab/net/denoiser.hpp"

namespace ctrtab::net {

enum class ZeroConvKind { dense, elementwise };
enum class NoiseType { laplace, gaussian, uniform };
enum class Process { ddpm, ve };

std::string_view to_string(ZeroConvKind k);
std::string_view to_string(NoiseType n);
std::string_view to_string(Process p);
ZeroConvKind zero_conv_kind_from_string(std::string_view s);
NoiseType noise_type_from_string(std::string_view s);
Process process_from_string(std::string_view s);

// C_f = x0 + noise. Laplace(b) by default; the Gaussian and uniform variants
// share its variance 2 b^2. b = 0 returns x0 unchanged.
nd::Tensor make_condition(const nd::Tensor& x0, double b, NoiseType type, nd::RngStream& rng);

// Zero-initialized adapter. Dense: weight (in x out). Elementwise: weight
// (1 x n), requires in == out.
struct ZeroConv {
  ZeroConvKind kind = ZeroConvKind::dense;
  nd::Tensor weight;
  nd::Tensor bias;

  friend bool operator==(const ZeroConv&, const ZeroConv&) = default;
};

ZeroConv zero_conv(ZeroConvKind kind, std::size_t in, std::size_t out);

struct ControlParams {
  ZeroConv zc_in;    // dim -> dim, applied to C_f
  Dense input;       // copy of the denoiser input projection
  Dense hidden1;     // copy of the encoder block
  Dense hidden2;     // copy of the mid block
  ZeroConv zc_mid;   // hidden -> hidden, applied to h_right
  ZeroConv zc_last;  // dim -> dim, applied to C_f for the last fusion
  double b = 0.005;  // Laplace scale of the training condition

  std::vector<NamedTensor> named();
  std::vector<ConstNamedTensor> named() const;
  std::size_t parameter_count() const;

  friend bool operator==(const ControlParams&, const ControlParams&) = default;
};

// Zero convolutions at exactly zero, copied blocks equal to the denoiser's.
ControlParams attach_control(const DenoiserParams& denoiser, double b, ZeroConvKind kind = ZeroConvKind::dense);

struct BundleFlags {
  bool use_last_fusion = true;
  NoiseType noise_type = NoiseType::laplace;
  ZeroConvKind zero_conv = ZeroConvKind::dense;
  diffusion::SigmaKind sigma = diffusion::SigmaKind::posterior;
  Process process = Process::ddpm;

  nlohmann::json to_json() const;
  static BundleFlags from_json(const nlohmann::json& j);
  friend bool operator==(const BundleFlags&, const BundleFlags&) = default;
};

struct ModelBundle {
  DenoiserParams denoiser;
  std::optional<ControlParams> control;
  diffusion::DdpmSchedule ddpm;
  diffusion::VeSchedule ve;
  data::EncoderState encoder;
  BundleFlags flags;
  nlohmann::json config;  // training config echo

  bool has_control() const noexcept { return control.has_value(); }
  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

// Network time input: the integer step for DDPM, 1000 t for VE.
double model_time(Process process, double t);

struct BoundZeroConv {
  ZeroConvKind kind = ZeroConvKind::dense;
  nd::Var weight;
  nd::Var bias;
};

nd::Var apply(const nd::Var& x, const BoundZeroConv& zc);

struct BoundControl {
  const ControlParams* params = nullptr;
  BoundZeroConv zc_in, zc_mid, zc_last;
  BoundDense input, hidden1, hidden2;

  // Leaves in ControlParams::named() order.
  std::vector<nd::Var> vars() const;
};

BoundControl bind(nd::Tape& tape, const ControlParams& params, bool trainable);

struct ControlOutput {
  nd::Var x_right;
  nd::Var h_right;
  nd::Var c_last;
};

// x_right = input(zc_in(C_f) + x_t) + t_emb, then the copied encoder and mid
// blocks; c_last = zc_last(C_f).
ControlOutput control_forward(const nd::Var& x_t, const nd::Var& t_emb, const nd::Var& c_f, const BoundControl& control);

struct FusedOutput {
  nd::Var eps;
  HiddenTrace trace;
  ControlOutput control;
};

// Denoiser with h_fusion = h_left + zc_mid(h_right) at the decoder input and,
// when use_last_fusion, + zc_last(C_f) on the output.
FusedOutput fused_forward(const nd::Var& x_t, const nd::Var& embed, const nd::Var& c_f, const BoundDenoiser& net,
                          const BoundControl& control, bool use_last_fusion, const ForwardOptions& options = {});

// Tape-free inference; falls back to the bare denoiser when the bundle has no
// control branch or c_f is null.
nd::Tensor predict_noise(const ModelBundle& bundle, const nd::Tensor& x_t, std::span<const double> t,
                         const nd::Tensor* c_f);

}  // namespace ctrtab::net
