#include "ctrtab/nd/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "ctrtab/error.hpp"

namespace ctrtab::nd {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return mix_seed(mix_seed(seed) ^ mix_seed(~tag)); }

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

double RngStream::normal() {
  if (cached_normal_) {
    const double v = *cached_normal_;
    cached_normal_.reset();
    return v;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

double RngStream::laplace(double b) {
  const double u = uniform_open() - 0.5;
  if (u == 0.0) return 0.0;
  const double mag = -b * std::log1p(-2.0 * std::abs(u));
  return u > 0.0 ? mag : -mag;
}

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) throw DomainError("index: empty range");
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    const __uint128_t m = static_cast<__uint128_t>(x) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::size_t>(m >> 64);
  }
}

Rng::Rng(std::uint64_t seed)
    : seed_(seed),
      streams_{RngStream(derive_seed(seed, 1)), RngStream(derive_seed(seed, 2)), RngStream(derive_seed(seed, 3))} {}

Tensor sample_normal(RngStream& rng, const Shape& shape) {
  Tensor out(shape);
  for (auto& v : out.data()) v = rng.normal();
  return out;
}

Tensor sample_laplace(RngStream& rng, double b, const Shape& shape) {
  if (!(b > 0.0)) throw DomainError("sample_laplace: scale must be positive, got " + std::to_string(b));
  Tensor out(shape);
  for (auto& v : out.data()) v = rng.laplace(b);
  return out;
}

Tensor sample_uniform(RngStream& rng, double lo, double hi, const Shape& shape) {
  if (!(hi > lo)) throw DomainError("sample_uniform: empty interval");
  Tensor out(shape);
  for (auto& v : out.data()) v = lo + (hi - lo) * rng.uniform();
  return out;
}

std::vector<std::size_t> permutation(RngStream& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.index(i)]);
  return p;
}

}  // namespace ctrtab::nd
