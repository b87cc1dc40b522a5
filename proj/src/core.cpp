#include "micropolar/core.hpp"

#include <cmath>
#include <string>

#include "fft.hpp"
#include "micropolar/errors.hpp"
#include "micropolar/spectral.hpp"

namespace micropolar {
namespace {

constexpr MultiIndex kE[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

ScalarField d(const ScalarField& f, int axis) { return spectral::derivative(f, kE[axis]); }

// target += i xi_axis f, mode by mode.
void add_derivative(ScalarField& target, const ScalarField& f, int axis) {
  const GridSpec& g = f.grid();
  const int n = g.n();
  std::vector<double> xi(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) xi[a] = g.unit() * g.wrap(a);
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c, ++idx) {
        const double x = axis == 0 ? xi[a] : (axis == 1 ? xi[b] : xi[c]);
        const Complex v = f[idx];
        target[idx] += Complex(-x * v.imag(), x * v.real());
      }
}

// Transport in conservative form, (u . grad w)_i = sum_j d_j (u_j w_i), which
// equals the advective form for divergence-free u and needs fewer transforms.
// Products are formed on the collocation grid.
template <typename Samples, typename Forward>
void conservative_transport(const std::array<Samples, 3>& up, const std::array<Samples, 3>& wp, bool symmetric,
                            Forward forward, VectorField& out) {
  const std::size_t n = up[0].size();
  Samples prod(n);
  for (int i = 0; i < 3; ++i) {
    for (int j = symmetric ? i : 0; j < 3; ++j) {
      for (std::size_t k = 0; k < n; ++k) prod[k] = up[j][k] * wp[i][k];
      const ScalarField flux = forward(prod);
      add_derivative(out[i], flux, j);
      if (symmetric && i != j) add_derivative(out[j], flux, i);
    }
  }
}

// Real transport accumulated on the r2c half spectrum: each flux is
// transformed once, differentiated in place of the full spectrum, and the
// result expanded by conjugate symmetry only at the end.
void real_transport(const GridSpec& g, const std::array<std::vector<double>, 3>& up,
                    const std::array<std::vector<double>, 3>& wp, VectorField& ugu, VectorField& ugw) {
  const int n = g.n();
  const std::size_t h = static_cast<std::size_t>(n / 2 + 1);
  const std::size_t half_size = static_cast<std::size_t>(n) * n * h;
  const double scale = g.unit() / static_cast<double>(g.size());
  std::vector<double> xi(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) xi[a] = scale * g.wrap(a);
  std::array<std::vector<Complex>, 6> acc;
  for (auto& v : acc) v.assign(half_size, Complex(0.0, 0.0));
  std::vector<Complex> flux(half_size);
  std::vector<double> prod(g.size());
  auto accumulate = [&](std::vector<Complex>& target, int axis) {
    std::size_t idx = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (std::size_t c = 0; c < h; ++c, ++idx) {
          const double x = axis == 0 ? xi[a] : (axis == 1 ? xi[b] : xi[c]);
          const Complex v = flux[idx];
          target[idx] += Complex(-x * v.imag(), x * v.real());
        }
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (j >= i) {
        for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = up[j][k] * up[i][k];
        detail::fft3d_r2c_half(prod, flux, n);
        accumulate(acc[i], j);
        if (i != j) accumulate(acc[j], i);
      }
      for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = up[j][k] * wp[i][k];
      detail::fft3d_r2c_half(prod, flux, n);
      accumulate(acc[3 + i], j);
    }
  }
  for (int i = 0; i < 3; ++i) {
    std::vector<Complex> full(g.size());
    detail::expand_half_spectrum(acc[i], full, n);
    ugu[i] = ScalarField(g, std::move(full), true);
    full.assign(g.size(), Complex(0.0, 0.0));
    detail::expand_half_spectrum(acc[3 + i], full, n);
    ugw[i] = ScalarField(g, std::move(full), true);
  }
}

// Per-mode linear combination over |xi|: out = a(rho) x + b(rho) y.
template <typename Coef>
ScalarField radial_combine(const ScalarField& x, const ScalarField& y, Coef&& coef) {
  const GridSpec& g = x.grid();
  ScalarField out(g, x.is_real() && y.is_real());
  const double u2 = g.unit() * g.unit();
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double rho2 = u2 * (double(kx) * kx + double(ky) * ky + double(kz) * kz);
    const auto [a, b] = coef(rho2);
    out[idx] = a * x[idx] + b * y[idx];
  });
  return out;
}

// 1 / |xi| per |k|^2, zero at the origin.
std::vector<double> inverse_radius(const GridSpec& g) {
  const std::size_t mmax = 3 * static_cast<std::size_t>(g.n() / 2) * (g.n() / 2);
  std::vector<double> t(mmax + 1, 0.0);
  for (std::size_t m = 1; m <= mmax; ++m) t[m] = 1.0 / (g.unit() * std::sqrt(static_cast<double>(m)));
  return t;
}

double state_scale(const TransformedState& ts) {
  double m = ts.omega_d.max_abs();
  for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(ts.omega_mean[i]));
  for (int e = 0; e < 3; ++e) m = std::max({m, ts.u_a.entry(e).max_abs(), ts.omega_omega.entry(e).max_abs()});
  return m;
}

double rel_diff(const ScalarField& a, const ScalarField& b, double scale) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return scale == 0.0 ? m : m / scale;
}

}  // namespace

void PhysicalParams::validate() const {
  if (chi < 0 || nu < 0 || kappa < 0 || mu < 0) throw DomainError("params: coefficients must be nonnegative");
  if (!(chi + nu > 0)) throw DomainError("params: chi + nu must be positive");
  if (!(mu > 0)) throw DomainError("params: mu must be positive");
}

AMatrixField to_antisymmetric(const VectorField& u) { return AMatrixField(u[2], -1.0 * u[1], u[0]); }

VectorField from_antisymmetric(const AMatrixField& m) { return VectorField(m.a23, -1.0 * m.a13, m.a12); }

AMatrixField curl_matrix(const VectorField& z) {
  return AMatrixField(d(z[1], 0) - d(z[0], 1), d(z[2], 0) - d(z[0], 2), d(z[2], 1) - d(z[1], 2));
}

VectorField matrix_divergence(const AMatrixField& m) {
  return VectorField(d(m.a12, 1) + d(m.a13, 2), d(m.a23, 2) - d(m.a12, 0), -1.0 * (d(m.a13, 0) + d(m.a23, 1)));
}

OmegaSplit decompose_omega(const VectorField& omega) {
  const GridSpec& g = omega.grid();
  const bool real = omega.is_real();
  OmegaSplit s{ScalarField(g, real), AMatrixField(g, real)};
  const std::vector<double> inv = inverse_radius(g);
  const double u = g.unit();
  const Complex I(0.0, 1.0);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double r = inv[static_cast<std::size_t>(kx * kx + ky * ky + kz * kz)];
    if (r == 0.0) return;
    const double x0 = u * kx, x1 = u * ky, x2 = u * kz;
    const Complex w0 = omega[0][idx], w1 = omega[1][idx], w2 = omega[2][idx];
    const Complex ir = I * r;
    s.omega_d[idx] = ir * (x0 * w0 + x1 * w1 + x2 * w2);
    s.omega_omega.a12[idx] = ir * (x0 * w1 - x1 * w0);
    s.omega_omega.a13[idx] = ir * (x0 * w2 - x2 * w0);
    s.omega_omega.a23[idx] = ir * (x1 * w2 - x2 * w1);
  });
  return s;
}

VectorField reconstruct_omega(const ScalarField& omega_d, const AMatrixField& omega_omega) {
  const GridSpec& g = omega_d.grid();
  require_same_grid(g, omega_omega.grid(), "reconstruct_omega");
  VectorField out(g, omega_d.is_real() && omega_omega.is_real());
  const std::vector<double> inv = inverse_radius(g);
  const double u = g.unit();
  const Complex I(0.0, 1.0);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double r = inv[static_cast<std::size_t>(kx * kx + ky * ky + kz * kz)];
    if (r == 0.0) return;
    const double x0 = u * kx, x1 = u * ky, x2 = u * kz;
    const Complex a12 = omega_omega.a12[idx], a13 = omega_omega.a13[idx], a23 = omega_omega.a23[idx];
    const Complex d = omega_d[idx];
    const Complex ir = I * r;
    // Lambda^-1 (div omega_Omega - grad omega_d)
    out[0][idx] = ir * (x1 * a12 + x2 * a13 - x0 * d);
    out[1][idx] = ir * (x2 * a23 - x0 * a12 - x1 * d);
    out[2][idx] = ir * (-(x0 * a13 + x1 * a23) - x2 * d);
  });
  return out;
}

TransformedState transform(const State& s) {
  OmegaSplit w = decompose_omega(s.omega);
  return {to_antisymmetric(s.u), std::move(w.omega_omega), std::move(w.omega_d), s.t,
          {s.omega[0][0], s.omega[1][0], s.omega[2][0]}};
}

State reconstruct(const TransformedState& ts) {
  State s{from_antisymmetric(ts.u_a), reconstruct_omega(ts.omega_d, ts.omega_omega), ts.t};
  for (int i = 0; i < 3; ++i) s.omega[i][0] = ts.omega_mean[i];
  return s;
}

Convection convection(const State& s, bool dealias) {
  const GridSpec& g = s.u.grid();
  require_same_grid(g, s.omega.grid(), "convection");
  const bool real = s.u.is_real() && s.omega.is_real();
  VectorField ugu(g, s.u.is_real()), ugw(g, real);
  if (real) {
    using R = std::vector<double>;
    const std::array<R, 3> up{s.u[0].to_physical_real(), s.u[1].to_physical_real(), s.u[2].to_physical_real()};
    const std::array<R, 3> wp{s.omega[0].to_physical_real(), s.omega[1].to_physical_real(),
                              s.omega[2].to_physical_real()};
    real_transport(g, up, wp, ugu, ugw);
  } else {
    using C = std::vector<Complex>;
    const std::array<C, 3> up{s.u[0].to_physical(), s.u[1].to_physical(), s.u[2].to_physical()};
    const std::array<C, 3> wp{s.omega[0].to_physical(), s.omega[1].to_physical(), s.omega[2].to_physical()};
    auto fwd_u = [&](const C& x) { return ScalarField::from_physical(g, x, s.u.is_real()); };
    auto fwd_w = [&](const C& x) { return ScalarField::from_physical(g, x, false); };
    conservative_transport(up, up, true, fwd_u, ugu);
    conservative_transport(up, wp, false, fwd_w, ugw);
  }
  if (dealias) {
    ugu = spectral::dealias(ugu);
    ugw = spectral::dealias(ugw);
  }
  return {spectral::leray_project(ugu), std::move(ugw)};
}

Tendency rhs_projected(const State& s, const PhysicalParams& p, bool nonlinear, bool dealias) {
  p.validate();
  const GridSpec& g = s.u.grid();
  require_same_grid(g, s.omega.grid(), "rhs_projected");
  Tendency out{VectorField(g, s.u.is_real()), VectorField(g, s.omega.is_real())};
  const double u = g.unit();
  const Complex I(0.0, 1.0);
  const double c = 2.0 * p.chi;
  // viscous, micro-rotation coupling and grad-div terms, mode by mode
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double x[3] = {u * kx, u * ky, u * kz};
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const Complex a[3] = {s.u[0][idx], s.u[1][idx], s.u[2][idx]};
    const Complex w[3] = {s.omega[0][idx], s.omega[1][idx], s.omega[2][idx]};
    const Complex xw = x[0] * w[0] + x[1] * w[1] + x[2] * w[2];
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      const Complex curl_w = I * (x[j] * w[k] - x[k] * w[j]);
      const Complex curl_u = I * (x[j] * a[k] - x[k] * a[j]);
      out.du[i][idx] = -(p.chi + p.nu) * r2 * a[i] + c * curl_w;
      out.domega[i][idx] = -(p.mu * r2 + 4.0 * p.chi) * w[i] + c * curl_u - p.kappa * x[i] * xw;
    }
  });
  if (nonlinear) {
    const Convection cv = convection(s, dealias);
    out.du -= cv.u_grad_u;
    out.domega -= cv.u_grad_omega;
  }
  return out;
}

TransformedTendency transform_tendency(const Tendency& t) {
  OmegaSplit w = decompose_omega(t.domega);
  return {to_antisymmetric(t.du), std::move(w.omega_omega), std::move(w.omega_d)};
}

TransformedTendency transformed_forcing(const Convection& c) {
  OmegaSplit w = decompose_omega(c.u_grad_omega);
  TransformedTendency out{to_antisymmetric(c.u_grad_u), std::move(w.omega_omega), std::move(w.omega_d)};
  out.du_a *= -1.0;
  out.domega_omega *= -1.0;
  out.domega_d *= -1.0;
  return out;
}

TransformedTendency rhs_transformed(const TransformedState& ts, const State& s, bool nonlinear) {
  const TransformedState check = transform(s);
  const double scale = std::max(state_scale(ts), state_scale(check));
  if (transformed_distance(ts, check) > 1e-8 * scale)
    throw ConsistencyError("rhs_transformed: transformed state does not match the primitive state");

  TransformedTendency out;
  out.du_a = AMatrixField(ts.u_a.grid(), ts.u_a.is_real());
  out.domega_omega = AMatrixField(ts.u_a.grid(), ts.u_a.is_real());
  for (int e = 0; e < 3; ++e) {
    const ScalarField& a = ts.u_a.entry(e);
    const ScalarField& w = ts.omega_omega.entry(e);
    out.du_a.entry(e) = radial_combine(a, w, [](double r2) { return std::pair{-r2, std::sqrt(r2)}; });
    out.domega_omega.entry(e) =
        radial_combine(a, w, [](double r2) { return std::pair{std::sqrt(r2), -(r2 + 2.0)}; });
  }
  out.domega_d = radial_combine(ts.omega_d, ts.omega_d, [](double r2) { return std::pair{-(2.0 * r2 + 2.0), 0.0}; });
  if (nonlinear) {
    const TransformedTendency f = transformed_forcing(convection(s));
    out.du_a += f.du_a;
    out.domega_omega += f.domega_omega;
    out.domega_d += f.domega_d;
  }
  return out;
}

double energy(const State& s) {
  const double a = spectral::l2_norm(s.u);
  const double b = spectral::l2_norm(s.omega);
  return 0.5 * (a * a + b * b);
}

double transformed_distance(const TransformedState& a, const TransformedState& b) {
  double m = rel_diff(a.omega_d, b.omega_d, 0.0);
  for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(a.omega_mean[i] - b.omega_mean[i]));
  for (int e = 0; e < 3; ++e) {
    m = std::max(m, rel_diff(a.u_a.entry(e), b.u_a.entry(e), 0.0));
    m = std::max(m, rel_diff(a.omega_omega.entry(e), b.omega_omega.entry(e), 0.0));
  }
  return m;
}

}  // namespace micropolar
