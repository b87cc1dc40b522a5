#pragma once

#include <cmath>
#include <random>

#include "micropolar/grid.hpp"

namespace testing_support {

using micropolar::Complex;
using micropolar::GridSpec;
using micropolar::ScalarField;
using micropolar::VectorField;

/// Real field with random coefficients on |k_i| <= kmax, zero mean optional.
inline ScalarField random_field(const GridSpec& g, std::mt19937_64& rng, int kmax,
                                bool mean_free = true) {
  std::normal_distribution<double> nd;
  ScalarField f(g, true);
  micropolar::for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    if (std::abs(kx) <= kmax && std::abs(ky) <= kmax && std::abs(kz) <= kmax &&
        kx != -g.n() / 2 && ky != -g.n() / 2 && kz != -g.n() / 2)
      f[idx] = Complex(nd(rng), nd(rng));
  });
  f.enforce_reality();
  if (mean_free) f[0] = 0.0;
  return f;
}

inline VectorField random_vector(const GridSpec& g, std::mt19937_64& rng, int kmax) {
  return VectorField(random_field(g, rng, kmax), random_field(g, rng, kmax), random_field(g, rng, kmax));
}

inline double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_diff(const VectorField& a, const VectorField& b) {
  return std::max({max_diff(a[0], b[0]), max_diff(a[1], b[1]), max_diff(a[2], b[2])});
}

inline double max_abs(const VectorField& v) {
  return std::max({v[0].max_abs(), v[1].max_abs(), v[2].max_abs()});
}

/// Samples of fn(x, y, z) on the collocation lattice.
template <typename Fn>
std::vector<Complex> sample(const GridSpec& g, Fn&& fn) {
  const int n = g.n();
  const double h = g.length() / n;
  std::vector<Complex> out(g.size());
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c, ++idx) out[idx] = fn(a * h, b * h, c * h);
  return out;
}

}  // namespace testing_support
