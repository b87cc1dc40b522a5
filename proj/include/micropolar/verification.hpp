#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "micropolar/integrator.hpp"

namespace micropolar::verify {

/// REPORT marks a measured quantity that carries no pass/fail meaning.
enum class Verdict { PASS, FAIL, REPORT };
const char* verdict_name(Verdict v) noexcept;

struct Check {
  std::string anchor;  ///< stable identifier, e.g. "green-lp-smoothing"
  std::string what;    ///< one-line description of the measurement
  std::vector<std::pair<std::string, double>> measured;
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::REPORT;
  /// Measured value by key; DomainError if absent.
  double value(const std::string& key) const;
};

struct Report {
  std::string suite;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, std::string>> env;
  /// True when no check failed.
  bool passed() const noexcept;
  /// First check with this anchor; DomainError if absent.
  const Check& check(const std::string& anchor) const;
  void append(std::vector<Check> more);
};

/// {suite, checks: [{anchor, what, measured, tolerance, verdict}], env} with
/// non-finite numbers written as null. Byte-stable for equal reports.
std::string to_json(const Report& r);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------- analysis

/// Max |sum_j phi(2^-j |xi|) - 1| over every nonzero lattice mode.
Check check_partition(const GridSpec& g);
/// Delta_j Delta_k f = 0 for |j - k| >= 2 and Delta_j(S_{k-1} f Delta_k f) = 0
/// for |j - k| >= 5 on a random field.
Check check_orthogonality(const GridSpec& g, std::uint64_t seed);
/// T_f g + T_g f + R(f, g) against the dealiased product minus the means.
Check check_bony(const GridSpec& g, std::uint64_t seed);
/// Ball form ||d_1 f||_inf <= C 2^{j (1 + 3/2)} ||f||_2 and annulus form
/// ||f||_4 <= C 2^-j max_i ||d_i f||_4 on shell-localized random fields;
/// constants compared across `shells` (drift tolerance 20%).
Check check_bernstein(const GridSpec& g, const std::vector<int>& shells, std::uint64_t seed);
/// c_j = int (-Lap f)|f|^{p-2} f / (4^j int |f|^p) for p = 4, compared across shells.
Check check_poincare(const GridSpec& g, const std::vector<int>& shells, std::uint64_t seed);
/// ||f||_{B^{theta s1 + (1 - theta) s2}} <= ||f||_{B^s1}^theta ||f||_{B^s2}^(1 - theta).
Check check_interpolation(const GridSpec& g, std::uint64_t seed);
/// C_j = ||f f||_{B^{s1 + s2 - 3/2}_{2,inf}} / (||f||_{B^s1} ||f||_{B^s2}), s1 = s2 = 1/2,
/// for f localized in shell j, compared across `shells`. The square is formed
/// exactly on the 2x refined grid.
Check check_product(const GridSpec& g, const std::vector<int>& shells, std::uint64_t seed);
/// Damped heat flow d_t u - nu1 Lap u + nu2 u = f with shell-pure data: the
/// Chemin-Lerner norm of sampled snapshots against an exact time quadrature,
/// and the ratio ||u||_{L~^r B^{s + 2/r}} / (||u0||_{B^s} + ||f||_{L^1 B^s})
/// compared across shells for r in {1, 2, inf}.
Check check_heat_regularity(const GridSpec& g, std::uint64_t seed);

/// Shell triple used by the scale-stability checks: the three highest shells
/// whose annulus support is retained.
std::vector<int> stable_shells(const GridSpec& g);

Report verify_analysis_suite(const GridSpec& g, std::uint64_t seed);

// ------------------------------------------------------------------- green

/// Closed form against fine-step RK4 of the pair ODE over random (rho, t).
Check check_reduced_vs_ode(std::uint64_t seed, int samples = 100, double rho_max = 30.0, double t_max = 10.0);
/// 6x6 exponential, carried to transformed amplitudes, against the reduced
/// propagator over random (xi, t).
Check check_full_vs_reduced(std::uint64_t seed, int modes = 20);
/// Eigenvalues of the 2x2 symbol against rho^2 + 1 -+ sqrt(1 + rho^2).
Check check_generator_eigenvalues(int samples = 100);
/// Operator norm of the reduced propagator over a (rho, t) scan, <= 1.05.
Check check_propagator_bounded();
/// G(t) G(s) = G(t + s) on random (rho, t, s).
Check check_semigroup(std::uint64_t seed);
/// Normalized derivative sup of the given order on an n x n grid over
/// rho in [0.1, 30], t in [0.01, 10], compared with the 2x refined grid (5%).
Check check_bound_scan(int order, int points = 40);

struct SmoothingFit {
  int shell = 0;
  double c = 0.0;  ///< decay rate in units of lambda^2 = 4^j
  double C = 0.0;  ///< smallest prefactor for which the fitted bound holds at every sample
};

/// Fit of ||G(t) f||_p / ||f||_p ~ C exp(-c 4^j t) for annulus-localized
/// random f at shell j. Each shell lives on its own n^3 box scaled so that the
/// annulus sits at the same lattice radius. `full` applies the untransformed
/// 6x6 propagator to (u, omega) instead of the reduced one to (u_A, omega_Omega).
std::vector<SmoothingFit> smoothing_fits(int n, const std::vector<int>& shells, double p, bool full,
                                         std::uint64_t seed);
/// One check per exponent: c > 0 and max/min - 1 <= 0.25 for both C and c.
Check check_lp_smoothing(int n, const std::vector<int>& shells, double p, std::uint64_t seed);
/// The same protocol on the untransformed system (verdict REPORT).
Check contrast_full_smoothing(int n, const std::vector<int>& shells, double p, std::uint64_t seed);

struct GreenPreset {
  int n = 64;
  std::vector<int> shells{-2, -1, 1, 2, 3};
  std::vector<double> exponents{2.0, 4.0, lp::kInf};
  int samples = 100;
  int modes = 20;
};

Report verify_green_suite(const GreenPreset& preset, std::uint64_t seed);

// ---------------------------------------------------------------- dynamics

/// ||phi_eps||_{B^{3/p - 1}_{p,inf}} for phi_eps = exp(i K x1 (2 pi / L)) phi with
/// phi the family Gaussian, on the n^3 grid of box L. Computed in the frame
/// moving with the modulation: |phi_eps| = |exp(-i K x1) phi_eps| pointwise, so
/// each shell norm equals that of the envelope under the shifted multiplier
/// phi(2^-j |xi + K e1|), sampled on a frame grid of `frame_n` points per axis
/// refined by `oversample`.
double oscillation_norm(const GridSpec& g, int K, double p, int frame_n = 64, int oversample = 2);
/// Slope of log norm against log eps over eps = 2^-m L / 2pi, m in `ms`;
/// target 1 - 3/p, tolerance 0.1.
Check check_oscillation(const GridSpec& g, double p, const std::vector<int>& ms = {2, 3, 4, 5, 6});

struct DynamicsPreset {
  int n = 128;
  double length = 32.0 * kPi;
  IntegratorConfig integrator{0.2, Scheme::ETDRK2, 50.0, 5, true, true, {}};
  DataFamily data{DataKind::GAUSSIAN, 1.0, 0.0, 0, 0, 0.01};
  /// Boundedness exponents; decay and the a priori ledger use the first.
  std::vector<double> exponents{2.0, 4.0};
  double decay_from = 1.0;
  double flat_from = 10.0;
  /// Grid for the oscillation checks.
  int oscillation_n = 256;
  double oscillation_length = 2.0 * kPi;
};

/// Probes sampled along the dynamics run: orders 0, 1, 2 at p = exponents[0]
/// and order 0 at every further exponent, all at s = 3/p - 1, q = inf.
RunOptions dynamics_run_options(const DynamicsPreset& preset);

/// Checks derived from a finished (or partial) dynamics series: boundedness
/// per exponent, divergence, energy, decay slopes, the |alpha| = 0 flatness,
/// continuation monitor and the a priori ledger.
std::vector<Check> dynamics_checks(const TimeSeries& series, const DynamicsPreset& preset);

/// Runs the preset trajectory and the oscillation checks. `series_out`, when
/// given, receives the trajectory (partial on blow-up).
Report verify_dynamics_suite(const DynamicsPreset& preset, std::uint64_t seed, TimeSeries* series_out = nullptr);

/// Transformed ETDRK2 against the primitive REF_RK4 at dt / ratio: rel L2
/// difference of (u, omega) at t_end, tolerance `tolerance`.
Check check_formulation_equivalence(const GridSpec& g, const DataFamily& data, double dt, double t_end,
                                    int ratio = 50, double tolerance = 1e-6);

}  // namespace micropolar::verify
