#include <benchmark/benchmark.h>

#include "ctrtab/data/encoder.hpp"
#include "ctrtab/eval/metrics.hpp"
#include "ctrtab/nd/ops.hpp"
#include "ctrtab/nd/rng.hpp"
#include "ctrtab/sample/sampler.hpp"
#include "ctrtab/synth/synthgen.hpp"
#include "ctrtab/train/trainer.hpp"

using namespace ctrtab;
using nd::Tensor;

static Tensor randn(std::size_t r, std::size_t c, std::uint64_t seed) {
  nd::RngStream rng(seed);
  return nd::sample_normal(rng, {r, c});
}

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = randn(256, n, 1), b = randn(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nd::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * 256 * static_cast<int64_t>(n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

// One stage-2 optimizer step: fused forward, backward, AdamW.
static void BM_ControlStep(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  synth::SynthSpec s;
  s.n_rows = 512;
  s.n_features = dim;
  const auto t = synth::generate(s);
  const auto enc = data::fit_encoder(t);
  const Tensor x = data::encode(t, enc).matrix;
  auto cfg = train::TrainConfig::desk();
  cfg.steps = 1;
  const auto base = train::initial_bundle(x.cols(), enc, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(train::train_control(x, base, cfg).losses);
}
BENCHMARK(BM_ControlStep)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

// Full reverse chain for 256 conditioned rows.
static void BM_SampleChain(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  auto cfg = train::TrainConfig::desk();
  const Tensor pool = randn(256, dim, 3);
  auto bundle = train::initial_bundle(dim, data::EncoderState{}, cfg);
  bundle.control = net::attach_control(bundle.denoiser, cfg.b);
  sample::SampleConfig sc;
  sc.n_samples = 256;
  sc.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample::sample_batch(bundle, pool, sc));
}
BENCHMARK(BM_SampleChain)->Arg(12)->Arg(102)->Unit(benchmark::kMillisecond);

static void BM_Ndcr(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor syn = randn(n, 20, 4), tr = randn(n, 20, 5), te = randn(n / 4, 20, 6);
  for (auto _ : state) benchmark::DoNotOptimize(eval::ndcr(syn, tr, te));
}
BENCHMARK(BM_Ndcr)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
