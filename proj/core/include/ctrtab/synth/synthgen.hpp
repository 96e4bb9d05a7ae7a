#pragma once

#include <cstdint>

#include <nlohmann/json_fwd.hpp>

#include "ctrtab/data/table.hpp"

namespace ctrtab::synth {

enum class Task { binary, regression };

// High-dimensional synthetic table in the spirit of scikit-learn's
// make_classification, reduced to two Gaussian clusters so separability is
// analytically known.
struct SynthSpec {
  std::size_t n_rows = 3000;
  std::size_t n_features = 10;
  std::size_t n_informative = 10;
  std::size_t n_redundant = 0;  // linear combinations of informative features
  double class_sep = 1.0;
  double balance = 0.5;         // fraction of positive labels
  double noise_std = 0.1;       // regression target noise
  Task task = Task::binary;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthSpec from_json(const nlohmann::json& j);
};

// Columns f0..f{n-1} (informative, then redundant, then pure noise) followed
// by a categorical target "label" with values "0"/"1". Centers sit at
// +/- class_sep * u for a seeded unit vector u in the informative subspace.
data::RawTable generate_classification(const SynthSpec& spec);

// Columns f0..f{n-1} plus numerical target "target" = w . x_informative +
// noise_std * N(0, 1), with w a seeded unit vector.
data::RawTable generate_regression(const SynthSpec& spec);

data::RawTable generate(const SynthSpec& spec);

// The direction u (classification) or w (regression) used for `spec`.
std::vector<double> signal_direction(const SynthSpec& spec);

// 2-feature Gaussian mixture with a binary label, used for toy fidelity runs.
data::RawTable gaussian_mixture_table(std::size_t n_rows, std::uint64_t seed);

}  // namespace ctrtab::synth
