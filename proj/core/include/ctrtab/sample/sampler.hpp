#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ctrtab/data/table.hpp"
#include "ctrtab/net/control.hpp"

namespace ctrtab::sample {

enum class ConditionSource {
  train_rows_plus_noise,  // uniformly drawn pool row + noise(b_inference)
  fixed_rows,             // pool row (i mod pool size) + noise(b_inference)
  none                    // bare denoiser
};

std::string_view to_string(ConditionSource s);
ConditionSource condition_source_from_string(std::string_view s);

struct SampleConfig {
  std::optional<std::size_t> n_samples;  // default: training row count
  ConditionSource condition_source = ConditionSource::train_rows_plus_noise;
  std::optional<double> b_inference;  // default: the training b
  std::uint64_t seed = 0;
  std::size_t chunk = 256;
  std::size_t threads = 0;  // 0: hardware concurrency capped by CTRTAB_THREADS

  nlohmann::json to_json() const;
  static SampleConfig from_json(const nlohmann::json& j, SampleConfig base);
  static SampleConfig from_json(const nlohmann::json& j) { return from_json(j, SampleConfig{}); }
};

// Called once per reverse step of every chunk with the chunk's condition
// matrix (empty for the bare denoiser).
using StepHook = std::function<void(std::size_t chunk, double t, const nd::Tensor& c_f)>;

// Number of worker threads for a requested count, honouring CTRTAB_THREADS.
std::size_t resolve_threads(std::size_t requested);

// Reverse diffusion from x_T ~ N(0, I) (DDPM) or N(0, sigma_max^2 I) (VE).
// Each chunk of rows has its own seed derived from (seed, chunk index); x_T
// and the step noise come from its noise stream, condition draws from its
// data stream. Output is independent of the thread count.
nd::Tensor sample_batch(const net::ModelBundle& bundle, const nd::Tensor& condition_pool, const SampleConfig& config,
                        const StepHook& hook = {});

// sample_batch on the encoded training table, then decode. n_samples
// defaults to the training row count.
data::RawTable synthesize_table(const net::ModelBundle& bundle, const data::RawTable& train, const SampleConfig& config);

}  // namespace ctrtab::sample
