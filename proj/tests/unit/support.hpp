#pragma once

#include <functional>

#include "ctrtab/nd/ops.hpp"
#include "ctrtab/nd/rng.hpp"

namespace ctrtab::test {

// Central-difference gradient of a scalar function of one tensor.
inline nd::Tensor fd_gradient(const std::function<double(const nd::Tensor&)>& f, const nd::Tensor& x,
                              double h = 1e-6) {
  nd::Tensor g(x.shape());
  nd::Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = probe[i];
    probe[i] = keep + h;
    const double up = f(probe);
    probe[i] = keep - h;
    const double down = f(probe);
    probe[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// max |a - b| / max(1, |b|) elementwise.
inline double max_rel_err(const nd::Tensor& a, const nd::Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return worst;
}

inline nd::Tensor randn(std::size_t r, std::size_t c, std::uint64_t seed) {
  nd::RngStream rng(seed);
  return nd::sample_normal(rng, {r, c});
}

}  // namespace ctrtab::test
