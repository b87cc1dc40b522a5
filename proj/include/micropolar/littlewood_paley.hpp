#pragma once

#include <limits>
#include <vector>

#include "micropolar/grid.hpp"

namespace micropolar::lp {

/// Radial ball bump: 1 on [0, 1], 0 on [4/3, inf), C-infinity in between.
double chi(double r);
/// Annulus bump chi(r/2) - chi(r); supported in (1, 8/3), equal to 1 on [4/3, 2].
double phi(double r);

/// Dyadic shells retained by homogeneous norms on a grid:
/// j_min = ceil(log2(4/3 * 2pi/L)), j_max = floor(log2(3/4 * dealias cutoff)).
struct ShellRange {
  int j_min = 0;
  int j_max = -1;
  bool empty() const noexcept { return j_max < j_min; }
  int count() const noexcept { return empty() ? 0 : j_max - j_min + 1; }
};

ShellRange resolved_shells(const GridSpec& g);
/// Every shell carrying a nonzero weight on some lattice mode (retained or not).
ShellRange lattice_shells(const GridSpec& g);

/// Per-|k|^2 shell weights. A mode with |k|^2 = m belongs to shell j0[m] with
/// weight w0[m] and to j0[m] + 1 with weight w1[m]; no other shell touches it.
struct ShellTable {
  std::vector<int> j0;
  std::vector<double> w0, w1;
  double weight(long m, int j) const noexcept {
    if (m <= 0) return 0.0;
    const int base = j0[static_cast<std::size_t>(m)];
    if (j == base) return w0[static_cast<std::size_t>(m)];
    if (j == base + 1) return w1[static_cast<std::size_t>(m)];
    return 0.0;
  }
};

/// Cached per grid; safe to call concurrently.
const ShellTable& shell_table(const GridSpec& g);

inline long mode_norm2(int kx, int ky, int kz) noexcept {
  return static_cast<long>(kx) * kx + static_cast<long>(ky) * ky + static_cast<long>(kz) * kz;
}

/// Delta_j f: coefficients times phi(2^-j |xi|).
ScalarField project_shell(const ScalarField& f, int j);
/// S_j f: coefficients times chi(2^-j |xi|); the zero mode is kept.
ScalarField project_ball(const ScalarField& f, int j);
/// Sum of Delta_{j'} f over |j' - j| <= 1.
ScalarField project_wide_shell(const ScalarField& f, int j);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct BesovParams {
  double s = 0.0;
  double p = 2.0;
  double q = kInf;
};

/// ||Delta_j f||_{L^p} for j in `range`. p = 2 is evaluated by Parseval;
/// other exponents by collocation on the grid refined by `oversample`.
std::vector<double> shell_norms(const ScalarField& f, double p, const ShellRange& range,
                                int oversample = 1);

/// l^q norm of 2^{js} a_j over the range (sup for q = inf).
double weighted_lq(const std::vector<double>& shell_values, const ShellRange& range, double s,
                   double q);

/// Homogeneous Besov norm over the resolved shells. Throws DomainError if the
/// grid resolves no shell. Vector and matrix fields sum their entries' norms
/// (each independent matrix entry appears twice in the full 3x3 sum).
double besov_norm(const ScalarField& f, const BesovParams& bp, int oversample = 1);
double besov_norm(const VectorField& v, const BesovParams& bp, int oversample = 1);
double besov_norm(const AMatrixField& m, const BesovParams& bp, int oversample = 1);

/// Samples of per-shell norms ||Delta_j f(t_i)||_p over strictly increasing times.
struct ShellSeries {
  ShellRange range;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[i][j - j_min]

  void push(double t, std::vector<double> shell_values);
};

/// || 2^{js} ||Delta_j f||_{L^r_t L^p} ||_{l^q}. Time integrals use the
/// trapezoidal rule, r = inf takes the per-shell sup.
double chemin_lerner_norm(const ShellSeries& series, double r, double s, double q);

/// Convenience wrapper: per-shell norms of each snapshot, then the norm above.
double chemin_lerner_norm(const std::vector<double>& times, const std::vector<ScalarField>& fields,
                          double r, const BesovParams& bp);

struct BonyParts {
  ScalarField t_fg;  ///< sum_j S_{j-1} f Delta_j g
  ScalarField t_gf;  ///< sum_j S_{j-1} g Delta_j f
  ScalarField r_fg;  ///< sum_j Delta_j f (Delta_{j-1} + Delta_j + Delta_{j+1}) g
};

/// Paraproduct split over every lattice shell. The parts add up to the
/// dealiased product minus the product of the two means.
BonyParts bony_decompose(const ScalarField& f, const ScalarField& g);

}  // namespace micropolar::lp
