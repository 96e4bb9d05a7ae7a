#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>

#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::nd {

// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// One reproducible draw sequence. Normals use the Box-Muller transform on two
// open-interval uniforms; the second variate of each pair is cached.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on the open interval (0, 1).
  double uniform_open();
  double normal();
  // Laplace(0, b) by inverse CDF: u in (-1/2, 1/2) -> -b sign(u) ln(1 - 2|u|).
  double laplace(double b);
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

enum class Stream : std::uint8_t { noise = 0, init = 1, data = 2 };

// Seeded generator with independent noise / init / data streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  RngStream& stream(Stream s) { return streams_[static_cast<std::size_t>(s)]; }
  RngStream& noise() { return stream(Stream::noise); }
  RngStream& init() { return stream(Stream::init); }
  RngStream& data() { return stream(Stream::data); }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<RngStream, 3> streams_;
};

Tensor sample_normal(RngStream& rng, const Shape& shape);
// Throws DomainError for b <= 0.
Tensor sample_laplace(RngStream& rng, double b, const Shape& shape);
Tensor sample_uniform(RngStream& rng, double lo, double hi, const Shape& shape);

// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(RngStream& rng, std::size_t n);

}  // namespace ctrtab::nd
