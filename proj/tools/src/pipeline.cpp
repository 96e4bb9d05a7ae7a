#include "ctrtab/cli/pipeline.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "ctrtab/data/csv.hpp"
#include "ctrtab/data/split.hpp"
#include "ctrtab/error.hpp"
#include "ctrtab/nd/rng.hpp"

namespace ctrtab::cli {

using nlohmann::json;
using train::TrainConfig;

Prepared prepare(const data::RawTable& table, double test_fraction, std::uint64_t seed) {
  nd::RngStream rng(nd::derive_seed(seed, 0x5b));
  auto parts = data::split(table, test_fraction, rng);
  Prepared p;
  p.encoder = data::fit_encoder(parts.train);
  p.matrix = data::encode(parts.train, p.encoder).matrix;
  p.train = std::move(parts.train);
  p.test = std::move(parts.test);
  return p;
}

nd::Tensor noisy_duplicate(const nd::Tensor& matrix, const data::EncoderState& encoder, double scale,
                           std::uint64_t seed) {
  if (matrix.cols() != encoder.dim()) throw DimensionError("noisy_duplicate: matrix width differs from encoder");
  nd::RngStream rng(nd::derive_seed(seed, 0xd2));
  nd::Tensor copy = matrix;
  for (std::size_t r = 0; r < copy.rows(); ++r)
    for (std::size_t c = 0; c < encoder.dim_num(); ++c) copy(r, c) += rng.laplace(scale);
  const std::vector<nd::Tensor> parts{matrix, copy};
  return nd::vstack(parts);
}

std::vector<Variant> ablation_variants(const TrainConfig& base, std::span<const double> noise_scales,
                                       std::span<const net::NoiseType> noise_types) {
  std::vector<Variant> out;
  out.push_back({"ctrtab", base});
  out.push_back({"bare", base, true});

  Variant v{"train_x2", base, true};
  v.config.steps *= 2;
  out.push_back(v);

  out.push_back({"data_x2", base, true, true});

  v = {"model_x2", base, true, true};
  v.config.hidden *= 2;
  out.push_back(v);

  v = {"dropout_reg", base, true};
  v.config.dropout = 0.1;
  out.push_back(v);

  v = {"joint_train", base};
  v.config.stage = train::Stage::joint;
  out.push_back(v);

  v = {"no_last_fusion", base};
  v.config.flags.use_last_fusion = false;
  out.push_back(v);

  for (double b : noise_scales) {
    v = {"noise_b=" + data::format_double(b), base};
    v.config.b = b;
    out.push_back(v);
  }
  for (auto t : noise_types) {
    v = {"noise_type=" + std::string(net::to_string(t)), base};
    v.config.flags.noise_type = t;
    out.push_back(v);
  }
  return out;
}

std::vector<Variant> select_variants(std::vector<Variant> all, std::span<const std::string> names) {
  std::vector<Variant> out;
  for (const auto& name : names) {
    auto it = std::find_if(all.begin(), all.end(), [&](const Variant& v) { return v.name == name; });
    if (it == all.end()) throw ConfigError("ablate: unknown variant '" + name + "'");
    out.push_back(*it);
  }
  return out;
}

json VariantResult::to_json() const { return json{{"name", name}, {"config", config}, {"metrics", metrics.to_json()}}; }

namespace {

// Settings that only matter after stage 1 are reset so equal keys mean an
// identical denoiser.
std::string stage1_key(const Variant& v) {
  TrainConfig c = v.config;
  const TrainConfig d;
  c.b = d.b;
  c.flags.use_last_fusion = d.flags.use_last_fusion;
  c.flags.noise_type = d.flags.noise_type;
  c.flags.zero_conv = d.flags.zero_conv;
  c.flags.sigma = d.flags.sigma;
  c.stage = train::Stage::denoiser;
  json k = c.to_json();
  k["duplicate_data"] = v.duplicate_data;
  return k.dump();
}

}  // namespace

std::vector<VariantResult> run_ablation(const Prepared& prepared, std::span<const Variant> variants,
                                        const sample::SampleConfig& sampling, const eval::GbtParams& gbt,
                                        std::ostream* log) {
  std::map<std::string, net::ModelBundle> stage1;
  std::vector<VariantResult> out;
  for (const auto& v : variants) {
    v.config.validate();
    const nd::Tensor data = v.duplicate_data
                                ? noisy_duplicate(prepared.matrix, prepared.encoder, duplicate_noise_scale, v.config.seed)
                                : prepared.matrix;
    net::ModelBundle bundle;
    if (v.config.stage == train::Stage::joint) {
      bundle = train::train_joint(data, prepared.encoder, v.config).bundle;
    } else {
      const auto key = stage1_key(v);
      auto it = stage1.find(key);
      if (it == stage1.end()) {
        TrainConfig c = v.config;
        c.stage = train::Stage::denoiser;
        it = stage1.emplace(key, train::train_denoiser(data, prepared.encoder, c).bundle).first;
      }
      bundle = v.bare ? it->second : train::train_control(data, it->second, v.config).bundle;
    }
    sample::SampleConfig sc = sampling;
    if (v.bare) sc.condition_source = sample::ConditionSource::none;
    const auto synthetic = sample::synthesize_table(bundle, prepared.train, sc);
    VariantResult r;
    r.name = v.name;
    r.config = v.config.to_json();
    r.config["bare"] = v.bare;
    r.config["duplicate_data"] = v.duplicate_data;
    r.metrics = eval::evaluate(prepared.train, prepared.test, synthetic, prepared.encoder, gbt);
    if (log) {
      *log << "ablate " << v.name;
      if (r.metrics.efficacy.synthetic.f1) *log << " f1 " << *r.metrics.efficacy.synthetic.f1;
      if (r.metrics.efficacy.synthetic.r2) *log << " r2 " << *r.metrics.efficacy.synthetic.r2;
      *log << '\n';
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ctrtab::cli
