#include "micropolar/green.hpp"

#include <cmath>
#include <sstream>

#include "micropolar/errors.hpp"
#include "micropolar/littlewood_paley.hpp"
#include "micropolar/parallel.hpp"

namespace micropolar::green {
namespace {

// f(M) for the reduced generator, given f at the two eigenvalues
// mu_+- = -(rho^2 + 1) +- s and the divided difference (f+ - f-) / (2 s).
Mat2 spectral_calculus(double rho, double s, double fp, double fm, double diff) {
  const double sm1 = rho * rho / (s + 1.0);  // s - 1 without cancellation
  Mat2 g;
  g(0, 0) = (fp * (s + 1.0) + fm * sm1) / (2.0 * s);
  g(1, 1) = (fp * sm1 + fm * (s + 1.0)) / (2.0 * s);
  g(0, 1) = g(1, 0) = rho * diff;
  return g;
}

double series_phi(int k, double z) {
  // sum_n z^n / (n + k)!, absolutely convergent; |z| < 1 here
  double term = 1.0;
  for (int i = 2; i <= k; ++i) term /= i;
  double sum = term;
  for (int n = 1; n < 30; ++n) {
    term *= z / (n + k);
    sum += term;
  }
  return sum;
}

}  // namespace

Mat2 reduced_generator(double rho) {
  Mat2 m;
  m << -rho * rho, rho, rho, -(rho * rho + 2.0);
  return m;
}

Mat2 reduced_green_shifted(double rho, double t, double shift) {
  const double s = std::sqrt(1.0 + rho * rho);
  if (t == 0.0) {
    const double e = std::exp(shift);
    return Mat2::Identity() * e;
  }
  const double c = -(rho * rho + 1.0);
  const double ep = std::exp((c + s) * t + shift);
  const double em = std::exp((c - s) * t + shift);
  const double x = s * t;
  double diff;
  if (x < 1e-4) {
    const double sinh_x = x * (1.0 + x * x / 6.0 * (1.0 + x * x / 20.0));
    diff = std::exp(c * t + shift) * sinh_x / s;
  } else {
    diff = (ep - em) / (2.0 * s);
  }
  return spectral_calculus(rho, s, ep, em, diff);
}

Mat2 reduced_green_eval(double rho, double t) { return reduced_green_shifted(rho, t, 0.0); }

double phi_function(int k, double z) {
  switch (k) {
    case 0: return std::exp(z);
    case 1: return std::abs(z) < 0.5 ? series_phi(1, z) : std::expm1(z) / z;
    case 2: return std::abs(z) < 0.5 ? series_phi(2, z) : (std::expm1(z) - z) / (z * z);
    default: throw UnsupportedOrderError("phi_function: only k = 0, 1, 2 are available");
  }
}

Mat2 reduced_phi(int k, double rho, double h) {
  if (k == 0) return reduced_green_eval(rho, h);
  const double s = std::sqrt(1.0 + rho * rho);
  const double c = -(rho * rho + 1.0);
  const double fp = phi_function(k, h * (c + s));
  const double fm = phi_function(k, h * (c - s));
  return spectral_calculus(rho, s, fp, fm, (fp - fm) / (2.0 * s));
}

EtdTable etd_table(const GridSpec& g, double h) {
  EtdTable t;
  t.h = h;
  const std::size_t mmax = 3 * static_cast<std::size_t>(g.n() / 2) * (g.n() / 2);
  for (int k = 0; k < 3; ++k) {
    t.pair[k].resize(mmax + 1);
    t.scalar[k].resize(mmax + 1);
  }
  for (std::size_t m = 0; m <= mmax; ++m) {
    const double rho = g.unit() * std::sqrt(static_cast<double>(m));
    const double rate = -(2.0 * rho * rho + 2.0);
    for (int k = 0; k < 3; ++k) {
      t.pair[k][m] = reduced_phi(k, rho, h);
      t.scalar[k][m] = phi_function(k, h * rate);
    }
  }
  return t;
}

Mat6 full_generator(const Vec3& xi) {
  using C = std::complex<double>;
  const C I(0.0, 1.0);
  const double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  Eigen::Matrix3cd b;
  b << 0.0, I * xi[2], -I * xi[1],
      -I * xi[2], 0.0, I * xi[0],
      I * xi[1], -I * xi[0], 0.0;
  Mat6 a = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    a(i, i) = r2;
    for (int j = 0; j < 3; ++j) a(3 + i, 3 + j) = (i == j ? r2 + 2.0 : 0.0) + xi[i] * xi[j];
  }
  a.block<3, 3>(0, 3) = b;
  a.block<3, 3>(3, 0) = b;
  return a;
}

/** \brief Degree-13 diagonal Pade approximant with scaling and squaring.
 *
 * The matrix is scaled by 2^-s so that its 1-norm falls below theta_13,
 * the approximant r13 = (V - U)^-1 (V + U) is formed, and the result is
 * squared s times.
 */
Mat6 expm_pade13(const Mat6& a) {
  static constexpr double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                                 1187353796428800., 129060195264000., 10559470521600.,
                                 670442572800., 33522128640., 1323241920., 40840800.,
                                 960960., 16380., 182., 1.};
  constexpr double theta13 = 5.371920351148152;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw NumericError("expm: non-finite input");
  int squarings = 0;
  if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Mat6 x = a * std::ldexp(1.0, -squarings);
  const Mat6 id = Mat6::Identity();
  const Mat6 x2 = x * x;
  const Mat6 x4 = x2 * x2;
  const Mat6 x6 = x4 * x2;
  Mat6 u = x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
  Mat6 v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
  Mat6 r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  if (!r.allFinite()) throw NumericError("expm: result is not finite");
  return r;
}

Mat6 full_green_eval(const Vec3& xi, double t) {
  if (t == 0.0) return Mat6::Identity();
  try {
    return expm_pade13(-t * full_generator(xi));
  } catch (const NumericError& e) {
    std::ostringstream os;
    os << e.what() << " at xi = (" << xi[0] << ", " << xi[1] << ", " << xi[2] << "), t = " << t;
    throw NumericError(os.str());
  }
}

TransformedState apply_semigroups(const TransformedState& ts, double t) {
  const GridSpec& g = ts.omega_d.grid();
  const std::size_t mmax = 3 * static_cast<std::size_t>(g.n() / 2) * (g.n() / 2);
  std::vector<Mat2> pair(mmax + 1);
  std::vector<double> heat(mmax + 1);
  for (std::size_t m = 0; m <= mmax; ++m) {
    const double rho = g.unit() * std::sqrt(static_cast<double>(m));
    pair[m] = reduced_green_eval(rho, t);
    heat[m] = std::exp(-(2.0 * rho * rho + 2.0) * t);
  }
  TransformedState out = ts;
  out.t = ts.t + t;
  for (auto& c : out.omega_mean) c *= std::exp(-2.0 * t);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const std::size_t m = static_cast<std::size_t>(lp::mode_norm2(kx, ky, kz));
    const Mat2& gm = pair[m];
    for (int e = 0; e < 3; ++e) {
      const Complex a = ts.u_a.entry(e)[idx];
      const Complex w = ts.omega_omega.entry(e)[idx];
      out.u_a.entry(e)[idx] = gm(0, 0) * a + gm(0, 1) * w;
      out.omega_omega.entry(e)[idx] = gm(1, 0) * a + gm(1, 1) * w;
    }
    out.omega_d[idx] = heat[m] * ts.omega_d[idx];
  });
  return out;
}

State apply_full_green(const State& s, double t) {
  const GridSpec& g = s.u.grid();
  State out = s;
  out.t = s.t + t;
  parallel_for(g.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t idx = lo; idx < hi; ++idx) {
      Vec6 v;
      for (int i = 0; i < 3; ++i) {
        v(i) = s.u[i][idx];
        v(3 + i) = s.omega[i][idx];
      }
      if (v.squaredNorm() == 0.0) continue;
      const Vec6 r = full_green_eval(g.xi(idx), t) * v;
      for (int i = 0; i < 3; ++i) {
        out.u[i][idx] = r(i);
        out.omega[i][idx] = r(3 + i);
      }
    }
  });
  return out;
}

double entry_sum(const Mat2& m) { return m.cwiseAbs().sum(); }

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo && n >= 2)) throw DomainError("geometric_grid: need 0 < lo < hi, n >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double r = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo * std::exp(r * i);
  out.back() = hi;
  return out;
}

BoundScanReport scan_derivative_bounds(int order, const std::vector<double>& rho_grid,
                                       const std::vector<double>& t_grid, double ceiling,
                                       double rel_step) {
  if (order < 0 || order > 2) throw UnsupportedOrderError("scan_derivative_bounds: |alpha| must be 0, 1 or 2");
  BoundScanReport rep;
  rep.order = order;
  rep.rho_grid = rho_grid;
  rep.t_grid = t_grid;
  rep.ceiling = ceiling;
  const double floor_step = order == 2 ? 1e-5 : 1e-7;
  if (order > 0 && rel_step < floor_step)
    rep.diagnostics.push_back("difference step below the cancellation floor; derivatives are noise-dominated");
  for (double rho : rho_grid) {
    if (!(rho > 0.0)) throw DomainError("scan_derivative_bounds: rho grid must be positive");
    for (double t : t_grid) {
      const double shift = rho * rho * t / 3.0;
      double q = 0.0;
      if (order == 0) {
        q = entry_sum(reduced_green_shifted(rho, t, shift));
      } else {
        const double h = rel_step * std::min(1.0, rho / (1.0 + rho * rho * t));
        const Mat2 gp = reduced_green_shifted(rho + h, t, shift);
        const Mat2 gm = reduced_green_shifted(rho - h, t, shift);
        if (order == 1) {
          q = rho * entry_sum((gp - gm) / (2.0 * h));
        } else {
          const Mat2 g0 = reduced_green_shifted(rho, t, shift);
          q = rho * rho * entry_sum((gp - 2.0 * g0 + gm) / (h * h));
        }
      }
      if (!std::isfinite(q)) {
        rep.finite = false;
        continue;
      }
      if (q > rep.sup) {
        rep.sup = q;
        rep.arg_rho = rho;
        rep.arg_t = t;
      }
    }
  }
  rep.pass = rep.finite && rep.sup <= ceiling;
  return rep;
}

}  // namespace micropolar::green
