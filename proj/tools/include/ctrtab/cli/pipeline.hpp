#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrtab/data/encoder.hpp"
#include "ctrtab/data/table.hpp"
#include "ctrtab/eval/report.hpp"
#include "ctrtab/net/control.hpp"
#include "ctrtab/sample/sampler.hpp"
#include "ctrtab/train/trainer.hpp"

namespace ctrtab::cli {

// Train/test split plus the encoder fitted on the training side.
struct Prepared {
  data::RawTable train;
  data::RawTable test;
  data::EncoderState encoder;
  nd::Tensor matrix;  // encoded training rows
};

Prepared prepare(const data::RawTable& table, double test_fraction, std::uint64_t seed);

// Training rows followed by a copy whose numerical encoded columns carry
// Laplace(scale) noise. One-hot blocks are copied unchanged.
nd::Tensor noisy_duplicate(const nd::Tensor& matrix, const data::EncoderState& encoder, double scale,
                           std::uint64_t seed);

// One ablation row. bare variants stop after stage 1 and sample without
// conditions.
struct Variant {
  std::string name;
  train::TrainConfig config;
  bool bare = false;
  bool duplicate_data = false;
};

inline constexpr double duplicate_noise_scale = 0.01;

// ctrtab, bare, train_x2, data_x2, model_x2, dropout_reg, joint_train,
// no_last_fusion, then noise_b=<b> per scale and noise_type=<t> per type.
std::vector<Variant> ablation_variants(const train::TrainConfig& base, std::span<const double> noise_scales,
                                       std::span<const net::NoiseType> noise_types);

// Keeps the variants whose names are listed; ConfigError on an unknown name.
std::vector<Variant> select_variants(std::vector<Variant> all, std::span<const std::string> names);

struct VariantResult {
  std::string name;
  nlohmann::json config;
  eval::MetricsReport metrics;

  nlohmann::json to_json() const;
};

// Stage-1 models are shared between variants whose denoiser settings agree.
std::vector<VariantResult> run_ablation(const Prepared& prepared, std::span<const Variant> variants,
                                        const sample::SampleConfig& sampling, const eval::GbtParams& gbt,
                                        std::ostream* log = nullptr);

}  // namespace ctrtab::cli
