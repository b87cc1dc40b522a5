#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "micropolar/core.hpp"
#include "micropolar/grid.hpp"

namespace micropolar::green {

using Mat2 = Eigen::Matrix2d;
using Mat6 = Eigen::Matrix<std::complex<double>, 6, 6>;
using Vec6 = Eigen::Matrix<std::complex<double>, 6, 1>;

/// Closed-form propagator of the scalar pair (u_A, omega_Omega) at |xi| = rho:
///   d/dt (a, w) = (-rho^2 a + rho w, rho a - (rho^2 + 2) w).
/// Exponents are combined before exponentiation, so the result is finite for
/// any rho^2 t.
Mat2 reduced_green_eval(double rho, double t);

/// exp(shift) * reduced_green_eval(rho, t), evaluated without overflow as long
/// as shift - rho^2 t stays representable.
Mat2 reduced_green_shifted(double rho, double t, double shift);

/// Generator of the pair above.
Mat2 reduced_generator(double rho);

/// phi_k(z) = sum_n z^n / (n + k)!, for k = 0, 1, 2.
double phi_function(int k, double z);

/// phi_k(h M(rho)) for the reduced generator M(rho).
Mat2 reduced_phi(int k, double rho, double h);

/// Per-|k|^2 tables of phi_0, phi_1, phi_2 for the (u_A, omega_Omega) pair and
/// for the omega_d rate -(2 rho^2 + 2), at step h.
struct EtdTable {
  double h = 0.0;
  std::array<std::vector<Mat2>, 3> pair;
  std::array<std::vector<double>, 3> scalar;
};
EtdTable etd_table(const GridSpec& g, double h);

/// 6x6 generator A(xi) of the untransformed linear system, so that
/// d/dt (u, omega)^ = -A (u, omega)^ for f(x) = sum f^ exp(i xi . x).
Mat6 full_generator(const Vec3& xi);

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant. Throws NumericError if the result is not finite.
Mat6 expm_pade13(const Mat6& a);

/// exp(-A(xi) t). Throws NumericError mentioning (xi, t) on failure.
Mat6 full_green_eval(const Vec3& xi, double t);

/// Exact linear evolution of a transformed state over `t`.
TransformedState apply_semigroups(const TransformedState& ts, double t);

/// Exact linear evolution of (u, omega) by the 6x6 propagator, mode by mode.
State apply_full_green(const State& s, double t);

struct BoundScanReport {
  int order = 0;                 ///< |alpha|
  std::vector<double> rho_grid;
  std::vector<double> t_grid;
  double sup = 0.0;              ///< of rho^|alpha| |d_rho^alpha G| exp(rho^2 t / 3)
  double arg_rho = 0.0;
  double arg_t = 0.0;
  double ceiling = 0.0;
  bool finite = true;
  bool pass = false;
  std::vector<std::string> diagnostics;
};

/// Samples the normalized radial derivative of the reduced propagator on the
/// tensor grid. Entry magnitudes are summed. `rel_step` scales the difference
/// step h = rel_step * min(1, rho / (1 + rho^2 t)).
BoundScanReport scan_derivative_bounds(int order, const std::vector<double>& rho_grid,
                                       const std::vector<double>& t_grid, double ceiling,
                                       double rel_step = 1e-3);

/// Entry-sum magnitude |M| = sum |M_ij|.
double entry_sum(const Mat2& m);

/// n points geometrically spaced over [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, int n);

}  // namespace micropolar::green
