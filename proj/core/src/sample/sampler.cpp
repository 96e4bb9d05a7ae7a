#include "ctrtab/sample/sampler.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "ctrtab/data/encoder.hpp"
#include "ctrtab/diffusion/kernels.hpp"
#include "ctrtab/error.hpp"

namespace ctrtab::sample {

using nd::Tensor;
using nlohmann::json;

std::string_view to_string(ConditionSource s) {
  switch (s) {
    case ConditionSource::train_rows_plus_noise: return "train_rows_plus_noise";
    case ConditionSource::fixed_rows: return "fixed_rows";
    case ConditionSource::none: return "none";
  }
  return "none";
}

ConditionSource condition_source_from_string(std::string_view s) {
  if (s == "train_rows_plus_noise") return ConditionSource::train_rows_plus_noise;
  if (s == "fixed_rows") return ConditionSource::fixed_rows;
  if (s == "none") return ConditionSource::none;
  throw ConfigError("unknown condition_source '" + std::string(s) + "'");
}

json SampleConfig::to_json() const {
  json j{{"condition_source", to_string(condition_source)}, {"seed", seed}, {"chunk", chunk}, {"threads", threads}};
  j["n_samples"] = n_samples ? json(*n_samples) : json(nullptr);
  j["b_inference"] = b_inference ? json(*b_inference) : json(nullptr);
  return j;
}

SampleConfig SampleConfig::from_json(const json& j, SampleConfig c) {
  if (!j.is_object()) throw ConfigError("sample config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_samples") {
        c.n_samples = v.is_null() ? std::nullopt : std::optional<std::size_t>(v.get<std::size_t>());
      } else if (key == "condition_source") {
        c.condition_source = condition_source_from_string(v.get<std::string>());
      } else if (key == "b_inference") {
        c.b_inference = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "chunk") {
        c.chunk = v.get<std::size_t>();
      } else if (key == "threads") {
        c.threads = v.get<std::size_t>();
      } else {
        throw ConfigError("sample: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sample: ") + e.what());
  }
  if (c.chunk == 0) throw ConfigError("sample: chunk must be positive");
  if (c.b_inference && !(*c.b_inference >= 0.0)) throw ConfigError("sample: b_inference must be non-negative");
  return c;
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CTRTAB_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && cap > 0) n = std::min<std::size_t>(n, cap);
  }
  return std::max<std::size_t>(n, 1);
}

namespace {

Tensor run_chunk(const net::ModelBundle& bundle, const Tensor& pool, const SampleConfig& config, double b_inf,
                 std::size_t chunk, std::size_t begin, std::size_t rows, const StepHook& hook) {
  nd::Rng rng(nd::derive_seed(config.seed, chunk));
  const std::size_t dim = bundle.denoiser.dim;
  const bool ddpm = bundle.flags.process == net::Process::ddpm;

  Tensor x = nd::sample_normal(rng.noise(), {rows, dim});
  if (!ddpm) x = bundle.ve.sigma_max() * x;

  Tensor c_f;
  const bool controlled = config.condition_source != ConditionSource::none;
  if (controlled) {
    std::vector<std::size_t> idx(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      idx[i] = config.condition_source == ConditionSource::train_rows_plus_noise ? rng.data().index(pool.rows())
                                                                                   : (begin + i) % pool.rows();
    }
    c_f = net::make_condition(pool.select_rows(idx), b_inf, bundle.flags.noise_type, rng.data());
  }
  const Tensor* cond = controlled ? &c_f : nullptr;
  const Tensor empty;

  auto check = [&](double t) {
    if (!nd::all_finite(x)) throw TrainingAbort("non-finite sampler state at t = " + std::to_string(t));
  };

  if (ddpm) {
    const std::size_t T = bundle.ddpm.steps();
    for (std::size_t t = T; t >= 1; --t) {
      if (hook) hook(chunk, static_cast<double>(t), controlled ? c_f : empty);
      const std::vector<double> ts(rows, net::model_time(net::Process::ddpm, static_cast<double>(t)));
      const Tensor eps = net::predict_noise(bundle, x, ts, cond);
      const Tensor z = t > 1 ? nd::sample_normal(rng.noise(), x.shape()) : Tensor(x.shape());
      x = diffusion::ddpm_reverse_step(x, t, eps, bundle.ddpm, z, bundle.flags.sigma);
      check(static_cast<double>(t));
    }
  } else {
    const std::size_t N = bundle.ve.steps();
    const double dt = 1.0 / static_cast<double>(N);
    for (std::size_t i = N; i >= 1; --i) {
      const double t = static_cast<double>(i) / static_cast<double>(N);
      if (hook) hook(chunk, t, controlled ? c_f : empty);
      const std::vector<double> ts(rows, net::model_time(net::Process::ve, t));
      const Tensor eps = net::predict_noise(bundle, x, ts, cond);
      const Tensor z = i > 1 ? nd::sample_normal(rng.noise(), x.shape()) : Tensor(x.shape());
      x = diffusion::ve_reverse_step(x, t, std::min(dt, t), eps, bundle.ve, z);
      check(t);
    }
  }
  return x;
}

}  // namespace

Tensor sample_batch(const net::ModelBundle& bundle, const Tensor& pool, const SampleConfig& config,
                    const StepHook& hook) {
  bundle.denoiser.validate();
  const std::size_t dim = bundle.denoiser.dim;
  const std::size_t n = config.n_samples.value_or(pool.rows());
  if (config.chunk == 0) throw ConfigError("sample: chunk must be positive");
  const bool controlled = config.condition_source != ConditionSource::none;
  if (controlled && !bundle.has_control())
    throw PrerequisiteError("conditioned sampling needs a checkpoint with a control branch");
  const double b_inf = config.b_inference.value_or(bundle.has_control() ? bundle.control->b : 0.0);
  Tensor out = Tensor::zeros(n, dim);
  if (n == 0) return out;
  if (controlled) {
    if (pool.rows() == 0) throw DataError("condition pool is empty");
    if (pool.cols() != dim) throw DimensionError("condition pool width does not match the model");
  }

  const std::size_t chunks = (n + config.chunk - 1) / config.chunk;
  const std::size_t workers = std::min(resolve_threads(config.threads), chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      const std::size_t begin = c * config.chunk;
      const std::size_t rows = std::min(config.chunk, n - begin);
      try {
        const Tensor x = run_chunk(bundle, pool, config, b_inf, c, begin, rows, hook);
        std::copy(x.data().begin(), x.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(begin * dim));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = chunks;
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool_threads;
    for (std::size_t i = 0; i < workers; ++i) pool_threads.emplace_back(work);
    for (auto& th : pool_threads) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

data::RawTable synthesize_table(const net::ModelBundle& bundle, const data::RawTable& train, const SampleConfig& config) {
  const auto encoded = data::encode(train, bundle.encoder);
  SampleConfig c = config;
  if (!c.n_samples) c.n_samples = train.rows();
  const Tensor x = sample_batch(bundle, encoded.matrix, c);
  return data::decode(x, bundle.encoder);
}

}  // namespace ctrtab::sample
