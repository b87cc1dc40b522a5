#include "micropolar/spectral.hpp"

#include <cmath>
#include <limits>

#include "fft.hpp"
#include "micropolar/errors.hpp"
#include "micropolar/parallel.hpp"

namespace micropolar::spectral {
namespace {

Complex i_power(int m) {
  switch (((m % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

}  // namespace

ScalarField derivative(const ScalarField& f, const MultiIndex& alpha) {
  if (alpha[0] < 0 || alpha[1] < 0 || alpha[2] < 0)
    throw DomainError("derivative: negative multi-index");
  const int order = alpha[0] + alpha[1] + alpha[2];
  if (order > kMaxDerivativeOrder)
    throw UnsupportedOrderError("derivative: order " + std::to_string(order) + " exceeds 4");
  const GridSpec& g = f.grid();
  ScalarField out(g, f.is_real());
  if (order == 0) return f;
  const Complex phase = i_power(order);
  const double u = g.unit();
  auto in = f.modes();
  auto res = out.modes();
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double w = ipow(u * kx, alpha[0]) * ipow(u * ky, alpha[1]) * ipow(u * kz, alpha[2]);
    res[idx] = phase * w * in[idx];
  });
  return out;
}

ScalarField lambda_power(const ScalarField& f, double s) {
  if (!(s >= -2.0 && s <= 2.0)) throw DomainError("lambda_power: s must lie in [-2, 2]");
  if (s == 0.0) return f;
  const GridSpec& g = f.grid();
  ScalarField out(g, f.is_real());
  const double u2 = g.unit() * g.unit();
  const std::size_t mmax = 3 * static_cast<std::size_t>(g.n() / 2) * (g.n() / 2);
  std::vector<double> mult(mmax + 1, 0.0);  // zero mode annihilated
  for (std::size_t m = 1; m <= mmax; ++m) mult[m] = std::pow(u2 * static_cast<double>(m), 0.5 * s);
  auto in = f.modes();
  auto res = out.modes();
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    res[idx] = mult[static_cast<std::size_t>(kx * kx + ky * ky + kz * kz)] * in[idx];
  });
  return out;
}

VectorField leray_project(const VectorField& v) {
  const GridSpec& g = v.grid();
  require_same_grid(g, v[1].grid(), "leray_project");
  require_same_grid(g, v[2].grid(), "leray_project");
  VectorField out(g, v.is_real());
  const double u = g.unit();
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double x[3] = {u * kx, u * ky, u * kz};
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const Complex a[3] = {v[0][idx], v[1][idx], v[2][idx]};
    if (r2 == 0.0) {
      for (int i = 0; i < 3; ++i) out[i][idx] = a[i];
      return;
    }
    const Complex dot = (x[0] * a[0] + x[1] * a[1] + x[2] * a[2]) / r2;
    for (int i = 0; i < 3; ++i) out[i][idx] = a[i] - x[i] * dot;
  });
  return out;
}

ScalarField dealias(const ScalarField& f) {
  const GridSpec& g = f.grid();
  const int n = g.n();
  std::vector<char> keep(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) keep[a] = std::abs(g.wrap(a)) <= g.dealias_cutoff_index();
  ScalarField out = f;
  auto res = out.modes();
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (!keep[a] || !keep[b]) {
        std::fill_n(res.begin() + static_cast<std::ptrdiff_t>(idx), n, Complex(0.0, 0.0));
        idx += n;
        continue;
      }
      for (int c = 0; c < n; ++c, ++idx)
        if (!keep[c]) res[idx] = 0.0;
    }
  return out;
}

VectorField dealias(const VectorField& v) { return VectorField(dealias(v[0]), dealias(v[1]), dealias(v[2])); }

ScalarField dealiased_product(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid(), "dealiased_product");
  auto pf = f.to_physical();
  const auto pg = g.to_physical();
  for (std::size_t i = 0; i < pf.size(); ++i) pf[i] *= pg[i];
  return dealias(ScalarField::from_physical(f.grid(), pf, f.is_real() && g.is_real()));
}

VectorField gradient(const ScalarField& f) {
  return VectorField(derivative(f, {1, 0, 0}), derivative(f, {0, 1, 0}), derivative(f, {0, 0, 1}));
}

ScalarField divergence(const VectorField& v) {
  ScalarField out = derivative(v[0], {1, 0, 0});
  out += derivative(v[1], {0, 1, 0});
  out += derivative(v[2], {0, 0, 1});
  return out;
}

VectorField curl(const VectorField& v) {
  const GridSpec& g = v.grid();
  VectorField out(g, v.is_real());
  const double u = g.unit();
  const Complex I(0.0, 1.0);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double x[3] = {u * kx, u * ky, u * kz};
    const Complex a[3] = {v[0][idx], v[1][idx], v[2][idx]};
    out[0][idx] = I * (x[1] * a[2] - x[2] * a[1]);
    out[1][idx] = I * (x[2] * a[0] - x[0] * a[2]);
    out[2][idx] = I * (x[0] * a[1] - x[1] * a[0]);
  });
  return out;
}

double divergence_residual(const VectorField& v) {
  const GridSpec& g = v.grid();
  const double u = g.unit();
  double num = 0.0;
  double den = 0.0;
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double x[3] = {u * kx, u * ky, u * kz};
    const Complex a[3] = {v[0][idx], v[1][idx], v[2][idx]};
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double mag = std::sqrt(std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]));
    num = std::max(num, std::abs(x[0] * a[0] + x[1] * a[1] + x[2] * a[2]));
    den = std::max(den, r * mag);
  });
  return den == 0.0 ? 0.0 : num / den;
}

double l2_norm(const ScalarField& f) {
  auto m = f.modes();
  const double s = deterministic_sum(m.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += std::norm(m[i]);
    return acc;
  });
  return std::sqrt(f.grid().volume() * s);
}

double l2_norm(const VectorField& v) {
  const double a = l2_norm(v[0]);
  const double b = l2_norm(v[1]);
  const double c = l2_norm(v[2]);
  return std::sqrt(a * a + b * b + c * c);
}

std::vector<Complex> to_physical_refined(const ScalarField& f, int factor) {
  if (factor < 1) throw DomainError("to_physical_refined: factor must be >= 1");
  if (factor == 1) return f.to_physical();
  const GridSpec& g = f.grid();
  const int m = g.n() * factor;
  const std::size_t mm = static_cast<std::size_t>(m);
  std::vector<Complex> buf(mm * mm * mm, Complex(0.0, 0.0));
  auto slot = [m](int k) { return k < 0 ? k + m : k; };
  auto in = f.modes();
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    buf[(static_cast<std::size_t>(slot(kx)) * mm + slot(ky)) * mm + slot(kz)] = in[idx];
  });
  detail::fft3d_inplace(buf, m, +1);
  if (f.is_real())
    for (auto& v : buf) v = Complex(v.real(), 0.0);
  return buf;
}

double lp_norm_samples(std::span<const Complex> samples, double p, double cell_volume) {
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    return deterministic_max(samples.size(), [&](std::size_t lo, std::size_t hi) {
      double m = 0.0;
      for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(samples[i]));
      return m;
    });
  }
  const bool even_int = p == 2.0 || p == 4.0 || p == 6.0;
  const double s = deterministic_sum(samples.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    if (even_int) {
      const int half = static_cast<int>(p) / 2;
      for (std::size_t i = lo; i < hi; ++i) {
        const double a2 = std::norm(samples[i]);
        double t = a2;
        for (int e = 1; e < half; ++e) t *= a2;
        acc += t;
      }
    } else {
      for (std::size_t i = lo; i < hi; ++i) acc += std::pow(std::abs(samples[i]), p);
    }
    return acc;
  });
  return std::pow(cell_volume * s, 1.0 / p);
}

double lp_norm(const ScalarField& f, double p, int oversample) {
  if (p == 2.0) return l2_norm(f);
  const auto samples = to_physical_refined(f, oversample);
  const double h = f.grid().length() / (f.grid().n() * oversample);
  return lp_norm_samples(samples, p, h * h * h);
}

ScalarField plane_wave(const GridSpec& grid, const std::array<int, 3>& k, Complex amplitude) {
  ScalarField out(grid, false);
  for (int i = 0; i < 3; ++i)
    if (k[i] < -grid.n() / 2 || k[i] >= grid.n() / 2) throw DomainError("plane_wave: k outside lattice");
  out[grid.index(grid.slot(k[0]), grid.slot(k[1]), grid.slot(k[2]))] = amplitude;
  return out;
}

}  // namespace micropolar::spectral
