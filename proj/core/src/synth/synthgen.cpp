#include "ctrtab/synth/synthgen.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "ctrtab/error.hpp"
#include "ctrtab/nd/rng.hpp"

namespace ctrtab::synth {

using nlohmann::json;
using data::ColumnKind;
using data::ColumnRole;
using data::ColumnSpec;

void SynthSpec::validate() const {
  if (n_rows == 0) throw DomainError("synth: n_rows must be positive");
  if (n_features == 0) throw DomainError("synth: n_features must be positive");
  if (n_informative < 1) throw DomainError("synth: n_informative must be at least 1");
  if (n_informative + n_redundant > n_features) {
    throw DomainError("synth: n_informative (" + std::to_string(n_informative) + ") + n_redundant (" +
                      std::to_string(n_redundant) + ") exceeds n_features (" + std::to_string(n_features) + ")");
  }
  if (!(class_sep >= 0.0)) throw DomainError("synth: class_sep must be non-negative");
  if (!(balance > 0.0 && balance < 1.0)) throw DomainError("synth: balance must lie in (0, 1)");
  if (!(noise_std >= 0.0)) throw DomainError("synth: noise_std must be non-negative");
}

json SynthSpec::to_json() const {
  return json{{"n_rows", n_rows},       {"n_features", n_features}, {"n_informative", n_informative},
              {"n_redundant", n_redundant}, {"class_sep", class_sep}, {"balance", balance},
              {"noise_std", noise_std},   {"task", task == Task::binary ? "binary" : "regression"},
              {"seed", seed}};
}

SynthSpec SynthSpec::from_json(const json& j) {
  SynthSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_rows") {
      s.n_rows = value.get<std::size_t>();
    } else if (key == "n_features") {
      s.n_features = value.get<std::size_t>();
    } else if (key == "n_informative") {
      s.n_informative = value.get<std::size_t>();
    } else if (key == "n_redundant") {
      s.n_redundant = value.get<std::size_t>();
    } else if (key == "class_sep") {
      s.class_sep = value.get<double>();
    } else if (key == "balance") {
      s.balance = value.get<double>();
    } else if (key == "noise_std") {
      s.noise_std = value.get<double>();
    } else if (key == "task") {
      const auto t = value.get<std::string>();
      if (t == "binary") {
        s.task = Task::binary;
      } else if (t == "regression") {
        s.task = Task::regression;
      } else {
        throw ConfigError("synth: unknown task '" + t + "'");
      }
    } else if (key == "seed") {
      s.seed = value.get<std::uint64_t>();
    } else {
      throw ConfigError("synth: unknown key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

namespace {

std::vector<double> unit_vector(nd::RngStream& rng, std::size_t n) {
  std::vector<double> u(n);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& v : u) {
      v = rng.normal();
      norm += v * v;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& v : u) v /= norm;
  return u;
}

std::vector<ColumnSpec> feature_columns(std::size_t n) {
  std::vector<ColumnSpec> cols;
  cols.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) cols.push_back({"f" + std::to_string(i), ColumnKind::numerical, ColumnRole::feature});
  return cols;
}

// Fills informative / redundant / noise columns given per-row informative means.
void fill_features(data::RawTable& t, const SynthSpec& spec, nd::Rng& rng,
                   const std::vector<std::vector<double>>& centers) {
  std::vector<std::vector<double>> mix(spec.n_redundant, std::vector<double>(spec.n_informative));
  for (auto& row : mix)
    for (auto& v : row) v = rng.init().normal();
  std::vector<double> x(spec.n_informative);
  for (std::size_t r = 0; r < spec.n_rows; ++r) {
    for (std::size_t j = 0; j < spec.n_informative; ++j) {
      x[j] = centers[r][j] + rng.data().normal();
      t.numeric(j).emplace_back(x[j]);
    }
    for (std::size_t k = 0; k < spec.n_redundant; ++k) {
      double v = 0.0;
      for (std::size_t j = 0; j < spec.n_informative; ++j) v += mix[k][j] * x[j];
      t.numeric(spec.n_informative + k).emplace_back(v);
    }
    for (std::size_t j = spec.n_informative + spec.n_redundant; j < spec.n_features; ++j)
      t.numeric(j).emplace_back(rng.data().normal());
  }
}

}  // namespace

std::vector<double> signal_direction(const SynthSpec& spec) {
  spec.validate();
  nd::Rng rng(spec.seed);
  return unit_vector(rng.init(), spec.n_informative);
}

data::RawTable generate_classification(const SynthSpec& spec) {
  spec.validate();
  if (spec.task != Task::binary) throw DomainError("generate_classification: task must be binary");
  nd::Rng rng(spec.seed);
  const auto u = unit_vector(rng.init(), spec.n_informative);

  auto cols = feature_columns(spec.n_features);
  cols.push_back({"label", ColumnKind::categorical, ColumnRole::target});
  data::RawTable t = data::RawTable::empty_like(data::TableSchema(std::move(cols)));

  const auto n_pos = static_cast<std::size_t>(std::llround(spec.balance * static_cast<double>(spec.n_rows)));
  std::vector<int> labels(spec.n_rows, 0);
  for (std::size_t i = 0; i < n_pos; ++i) labels[i] = 1;
  const auto perm = nd::permutation(rng.data(), spec.n_rows);

  std::vector<std::vector<double>> centers(spec.n_rows, std::vector<double>(spec.n_informative));
  auto& label_col = t.categorical(spec.n_features);
  for (std::size_t r = 0; r < spec.n_rows; ++r) {
    const int y = labels[perm[r]];
    const double sign = y ? 1.0 : -1.0;
    for (std::size_t j = 0; j < spec.n_informative; ++j) centers[r][j] = sign * spec.class_sep * u[j];
    label_col.emplace_back(y ? "1" : "0");
  }
  fill_features(t, spec, rng, centers);
  return t;
}

data::RawTable generate_regression(const SynthSpec& spec) {
  spec.validate();
  if (spec.task != Task::regression) throw DomainError("generate_regression: task must be regression");
  nd::Rng rng(spec.seed);
  const auto w = unit_vector(rng.init(), spec.n_informative);

  auto cols = feature_columns(spec.n_features);
  cols.push_back({"target", ColumnKind::numerical, ColumnRole::target});
  data::RawTable t = data::RawTable::empty_like(data::TableSchema(std::move(cols)));

  std::vector<std::vector<double>> zero(spec.n_rows, std::vector<double>(spec.n_informative, 0.0));
  fill_features(t, spec, rng, zero);
  auto& target = t.numeric(spec.n_features);
  for (std::size_t r = 0; r < spec.n_rows; ++r) {
    double y = 0.0;
    for (std::size_t j = 0; j < spec.n_informative; ++j) y += w[j] * *t.numeric(j)[r];
    target.emplace_back(y + spec.noise_std * rng.noise().normal());
  }
  return t;
}

data::RawTable generate(const SynthSpec& spec) {
  return spec.task == Task::binary ? generate_classification(spec) : generate_regression(spec);
}

data::RawTable gaussian_mixture_table(std::size_t n_rows, std::uint64_t seed) {
  nd::Rng rng(seed);
  std::vector<ColumnSpec> cols{{"x0", ColumnKind::numerical, ColumnRole::feature},
                               {"x1", ColumnKind::numerical, ColumnRole::feature},
                               {"mode", ColumnKind::categorical, ColumnRole::target}};
  data::RawTable t = data::RawTable::empty_like(data::TableSchema(std::move(cols)));
  for (std::size_t r = 0; r < n_rows; ++r) {
    const bool second = rng.data().uniform() < 0.5;
    const double cx = second ? 2.0 : -2.0;
    const double cy = second ? 1.0 : -1.0;
    t.numeric(0).emplace_back(cx + 0.6 * rng.data().normal());
    t.numeric(1).emplace_back(cy + 0.6 * rng.data().normal());
    t.categorical(2).emplace_back(second ? "b" : "a");
  }
  return t;
}

}  // namespace ctrtab::synth
