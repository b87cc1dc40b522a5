#include "micropolar/verification.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include "json.hpp"
#include <random>
#include <sstream>

#include "micropolar/errors.hpp"
#include "micropolar/green.hpp"
#include "micropolar/spectral.hpp"

namespace micropolar::verify {
namespace {

using green::Mat2;

std::string key(const std::string& stem, double v) {
  std::ostringstream os;
  os << stem << v;
  return os.str();
}

std::string p_label(double p) { return std::isinf(p) ? "inf" : key("", p); }

Check make_check(std::string anchor, std::string what) {
  Check c;
  c.anchor = std::move(anchor);
  c.what = std::move(what);
  return c;
}

void decide(Check& c, bool ok) { c.verdict = ok ? Verdict::PASS : Verdict::FAIL; }

double spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (!(*lo > 0.0)) return std::numeric_limits<double>::infinity();
  return *hi / *lo - 1.0;
}

double max_abs_coeff(const ScalarField& f) { return f.max_abs(); }

ScalarField random_real_field(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ScalarField f(g, true);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    if (g.retained(kx, ky, kz)) f[idx] = Complex(nd(rng), nd(rng));
  });
  f.enforce_reality();
  f[0] = 0.0;
  return spectral::dealias(f);
}

// ||f||_{B^s_{2,inf}} over the resolved shells.
double besov2(const ScalarField& f, double s) { return lp::besov_norm(f, {s, 2.0, lp::kInf}); }

// Physical samples on the native grid, real part.
std::vector<double> samples_real(const ScalarField& f) { return f.to_physical_real(); }

Mat2 rk4_pair(double rho, double t) {
  // Integrates the pair ODE shifted by its slow rate, so the integrated
  // matrix stays O(1) over the whole (rho, t) range.
  const double s = std::sqrt(1 + rho * rho);
  const double shift = rho * rho + 1 - s;
  const Mat2 m = green::reduced_generator(rho) + shift * Mat2::Identity();
  const double hmax = std::min(1e-3, 0.05 / (2 * s));
  const int n = std::max(1, static_cast<int>(std::ceil(t / hmax)));
  const double h = t / n;
  Mat2 y = Mat2::Identity();
  for (int i = 0; i < n; ++i) {
    const Mat2 k1 = m * y;
    const Mat2 k2 = m * (y + 0.5 * h * k1);
    const Mat2 k3 = m * (y + 0.5 * h * k2);
    const Mat2 k4 = m * (y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

Eigen::Matrix3cd cross_matrix(const Eigen::Vector3d& x) {
  Eigen::Matrix3cd k;
  k << 0, -x(2), x(1), x(2), 0, -x(0), -x(1), x(0), 0;
  return k;
}

// Per-mode transformed amplitudes (u_A entries, omega_Omega entries, omega_d)
// of a single Fourier coefficient pair, written independently of the field code.
Eigen::Matrix<Complex, 7, 1> transform_mode(const Eigen::Vector3d& x, const Eigen::Vector3cd& u,
                                            const Eigen::Vector3cd& w) {
  const Complex I(0, 1);
  const double rho = x.norm();
  const Eigen::Vector3cd c = I * (cross_matrix(x) * w) / rho;
  Eigen::Matrix<Complex, 7, 1> out;
  out << u(2), -u(1), u(0), c(2), -c(1), c(0), I * x.cast<Complex>().dot(w) / rho;
  return out;
}

}  // namespace

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::PASS: return "pass";
    case Verdict::FAIL: return "fail";
    case Verdict::REPORT: return "report";
  }
  return "report";
}

double Check::value(const std::string& k) const {
  for (const auto& [name, v] : measured)
    if (name == k) return v;
  throw DomainError("check " + anchor + ": no measured value '" + k + "'");
}

bool Report::passed() const noexcept {
  return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.verdict == Verdict::FAIL; });
}

const Check& Report::check(const std::string& anchor) const {
  for (const auto& c : checks)
    if (c.anchor == anchor) return c;
  throw DomainError("report " + suite + ": no check '" + anchor + "'");
}

void Report::append(std::vector<Check> more) {
  for (auto& c : more) checks.push_back(std::move(c));
}

std::string to_json(const Report& r) {
  using json = nlohmann::ordered_json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json checks = json::array();
  for (const auto& c : r.checks) {
    json m = json::object();
    for (const auto& [k, v] : c.measured) m[k] = num(v);
    checks.push_back({{"anchor", c.anchor},
                      {"what", c.what},
                      {"measured", m},
                      {"tolerance", num(c.tolerance)},
                      {"verdict", verdict_name(c.verdict)}});
  }
  json env = json::object();
  for (const auto& [k, v] : r.env) env[k] = v;
  json doc = {{"suite", r.suite}, {"checks", checks}, {"env", env}};
  return doc.dump(2) + "\n";
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need at least two paired samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw DomainError("fit_line: abscissae are all equal");
  const double slope = (n * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / n};
}

// ================================================================ analysis

Check check_partition(const GridSpec& g) {
  Check c = make_check("lp-partition", "max |sum_j phi(2^-j |xi|) - 1| over nonzero lattice modes");
  const lp::ShellRange all = lp::lattice_shells(g);
  const lp::ShellTable& tab = lp::shell_table(g);
  const std::size_t mmax = 3 * static_cast<std::size_t>(g.n() / 2) * (g.n() / 2);
  double direct = 0.0, table = 0.0;
  for (std::size_t m = 1; m <= mmax; ++m) {
    const double r = g.unit() * std::sqrt(static_cast<double>(m));
    double sum = 0.0;
    for (int j = all.j_min - 1; j <= all.j_max + 1; ++j) sum += lp::phi(std::ldexp(r, -j));
    direct = std::max(direct, std::abs(sum - 1.0));
    table = std::max(table, std::abs(tab.w0[m] + tab.w1[m] - 1.0));
  }
  c.measured = {{"defect", direct}, {"table_defect", table}};
  c.tolerance = 1e-8;
  decide(c, direct <= c.tolerance && table <= c.tolerance);
  return c;
}

Check check_orthogonality(const GridSpec& g, std::uint64_t seed) {
  Check c = make_check("lp-orthogonality",
                       "max |Delta_j Delta_k f| (|j-k| >= 2) and |Delta_j(S_{k-1} f Delta_k f)| (|j-k| >= 5), relative");
  std::mt19937_64 rng(seed);
  const ScalarField f = random_real_field(g, rng);
  const lp::ShellRange all = lp::lattice_shells(g);
  std::vector<ScalarField> shell;
  for (int j = all.j_min; j <= all.j_max; ++j) shell.push_back(lp::project_shell(f, j));
  const double scale = max_abs_coeff(f);
  double pair = 0.0;
  for (int j = all.j_min; j <= all.j_max; ++j)
    for (int k = all.j_min; k <= all.j_max; ++k)
      if (std::abs(j - k) >= 2)
        pair = std::max(pair, max_abs_coeff(lp::project_shell(shell[k - all.j_min], j)) / scale);
  double para = 0.0;
  for (int k = all.j_min; k <= all.j_max; ++k) {
    const ScalarField prod = spectral::dealiased_product(lp::project_ball(f, k - 1), shell[k - all.j_min]);
    const double ps = std::max(max_abs_coeff(prod), 1e-300);
    for (int j = all.j_min; j <= all.j_max; ++j)
      if (std::abs(j - k) >= 5) para = std::max(para, max_abs_coeff(lp::project_shell(prod, j)) / ps);
  }
  c.measured = {{"shell_pairs", pair}, {"paraproduct_blocks", para}};
  c.tolerance = 1e-12;
  decide(c, pair <= c.tolerance && para <= c.tolerance);
  return c;
}

Check check_bony(const GridSpec& g, std::uint64_t seed) {
  Check c = make_check("lp-bony", "|T_f g + T_g f + R(f,g) - (fg - mean f mean g)| / |fg|");
  std::mt19937_64 rng(seed);
  ScalarField f = random_real_field(g, rng), h = random_real_field(g, rng);
  f[0] = 0.7;
  h[0] = -0.3;
  const lp::BonyParts parts = lp::bony_decompose(f, h);
  ScalarField want = spectral::dealiased_product(f, h);
  want[0] -= f[0] * h[0];
  const ScalarField sum = parts.t_fg + parts.t_gf + parts.r_fg;
  double diff = 0.0;
  for (std::size_t i = 0; i < sum.size(); ++i) diff = std::max(diff, std::abs(sum[i] - want[i]));
  const double rel = diff / std::max(want.max_abs(), 1e-300);
  c.measured = {{"rel_err", rel}};
  c.tolerance = 1e-8;
  decide(c, rel <= c.tolerance);
  return c;
}

std::vector<int> stable_shells(const GridSpec& g) {
  const int top = static_cast<int>(std::floor(std::log2(g.dealias_cutoff() * 3.0 / 8.0) + 1e-12));
  return {top - 2, top - 1, top};
}

Check check_bernstein(const GridSpec& g, const std::vector<int>& shells, std::uint64_t seed) {
  Check c = make_check("lp-bernstein",
                       "C_j = ||d1 f||_inf / (2^{5j/2} ||f||_2) and 2^j ||f||_4 / max_i ||d_i f||_4, drift across shells");
  std::vector<double> ball, annulus;
  for (int j : shells) {
    const ScalarField f = shell_wave_packets(g, j, seed);
    const double f2 = spectral::lp_norm(f, 2.0);
    const double d1inf = spectral::lp_norm(spectral::derivative(f, {1, 0, 0}), lp::kInf, 2);
    ball.push_back(d1inf / (std::ldexp(1.0, j) * std::pow(2.0, 1.5 * j) * f2));
    double dmax = 0.0;
    for (int i = 0; i < 3; ++i) {
      MultiIndex a{0, 0, 0};
      a[i] = 1;
      dmax = std::max(dmax, spectral::lp_norm(spectral::derivative(f, a), 4.0));
    }
    annulus.push_back(std::ldexp(1.0, j) * spectral::lp_norm(f, 4.0) / dmax);
    c.measured.emplace_back(key("ball_C_j", j), ball.back());
    c.measured.emplace_back(key("annulus_C_j", j), annulus.back());
  }
  const double db = spread(ball), da = spread(annulus);
  c.measured.emplace_back("ball_drift", db);
  c.measured.emplace_back("annulus_drift", da);
  c.tolerance = 0.2;
  decide(c, db <= c.tolerance && da <= c.tolerance);
  return c;
}

Check check_poincare(const GridSpec& g, const std::vector<int>& shells, std::uint64_t seed) {
  Check c = make_check("lp-shell-poincare", "c_j = int (-Lap f)|f|^2 f / (4^j int |f|^4), drift across shells");
  std::vector<double> cs;
  for (int j : shells) {
    const ScalarField f = shell_wave_packets(g, j, seed);
    ScalarField lap = spectral::derivative(f, {2, 0, 0}) + spectral::derivative(f, {0, 2, 0}) +
                      spectral::derivative(f, {0, 0, 2});
    const std::vector<double> x = samples_real(f), l = samples_real(lap);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double x2 = x[i] * x[i];
      num += -l[i] * x2 * x[i];
      den += x2 * x2;
    }
    cs.push_back(num / (std::ldexp(1.0, 2 * j) * den));
    c.measured.emplace_back(key("c_j", j), cs.back());
  }
  const double d = spread(cs);
  c.measured.emplace_back("drift", d);
  c.measured.emplace_back("min_c", *std::min_element(cs.begin(), cs.end()));
  c.tolerance = 0.2;
  decide(c, d <= c.tolerance && cs.front() > 0.0);
  return c;
}

Check check_interpolation(const GridSpec& g, std::uint64_t seed) {
  Check c = make_check("lp-interpolation", "max ||f||_{B^{theta s1+(1-theta)s2}} / (||f||_{B^s1}^theta ||f||_{B^s2}^(1-theta))");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  double worst = 0.0;
  const lp::ShellRange range = lp::resolved_shells(g);
  for (int trial = 0; trial < 4; ++trial) {
    const ScalarField f = random_real_field(g, rng);
    for (double p : {2.0, 4.0}) {
      const auto sh = lp::shell_norms(f, p, range);
      for (int k = 0; k < 5; ++k) {
        const double s1 = -1.0 + 2.0 * ur(rng), s2 = -1.0 + 2.0 * ur(rng), th = ur(rng);
        const double lhs = lp::weighted_lq(sh, range, th * s1 + (1 - th) * s2, lp::kInf);
        const double rhs = std::pow(lp::weighted_lq(sh, range, s1, lp::kInf), th) *
                           std::pow(lp::weighted_lq(sh, range, s2, lp::kInf), 1 - th);
        worst = std::max(worst, lhs / rhs);
      }
    }
  }
  c.measured = {{"max_ratio", worst}};
  c.tolerance = 1.0 + 1e-12;
  decide(c, worst <= c.tolerance);
  return c;
}

Check check_product(const GridSpec& g, const std::vector<int>& shells, std::uint64_t seed) {
  Check c = make_check("lp-product",
                       "C_j = ||f^2||_{B^{-1/2}_{2,inf}} / ||f||_{B^{1/2}_{2,inf}}^2, drift across shells");
  const GridSpec fine(2 * g.n(), g.length());
  std::vector<double> cs;
  for (int j : shells) {
    // f^2: two independent packet sets would overlap only through their tails,
    // which are not self-similar across shells
    const ScalarField f = shell_wave_packets(g, j, seed);
    // exact square on the 2x refined grid, where no product mode is truncated
    std::vector<Complex> sq = spectral::to_physical_refined(f, 2);
    for (auto& v : sq) v = v * v;
    const ScalarField ff = ScalarField::from_physical(fine, sq, true);
    const double bf = besov2(f, 0.5);
    cs.push_back(besov2(ff, -0.5) / (bf * bf));
    c.measured.emplace_back(key("C_j", j), cs.back());
  }
  const double d = spread(cs);
  c.measured.emplace_back("drift", d);
  c.tolerance = 0.2;
  decide(c, d <= c.tolerance);
  return c;
}

Check check_heat_regularity(const GridSpec& g, std::uint64_t seed) {
  (void)seed;  // the data are single plane waves; nothing random
  Check c = make_check("heat-maximal-regularity",
                       "damped heat nu1 = 2, nu2 = 2, s = 1/2, p = 2: Chemin-Lerner norms vs exact quadrature, "
                       "C_{j,r} across shells");
  constexpr double nu1 = 2.0, nu2 = 2.0, s = 0.5, T = 1.0;
  const lp::ShellRange range = lp::resolved_shells(g);
  const std::vector<int> shells = stable_shells(g);
  // Geometric time nodes resolve exp(-a t) for every shell.
  std::vector<double> times{0.0};
  for (double t : green::geometric_grid(1e-6, T, 600)) times.push_back(t);
  const double rs[3] = {1.0, 2.0, lp::kInf};
  double worst_oracle = 0.0, worst_C = 0.0;
  std::vector<double> free_C[3];
  for (int j : shells) {
    // plane wave at the plateau center of shell j: Delta_j acts as the identity
    const int k = static_cast<int>(std::lround(5.0 / 3.0 * std::ldexp(1.0, j) / g.unit()));
    ScalarField wave = spectral::plane_wave(g, {k, 0, 0}, 0.5) + spectral::plane_wave(g, {-k, 0, 0}, 0.5);
    const double rho = g.unit() * k, a = nu1 * rho * rho + nu2;
    const double wave_p = spectral::lp_norm(wave, 2.0);
    const double b0 = besov2(wave, s);
    for (int kind = 0; kind < 2; ++kind) {
      // kind 0: u0 = wave, f = 0; kind 1: u0 = 0, f = wave on [0, T]
      auto amp = [&](double t) { return kind == 0 ? std::exp(-a * t) : -std::expm1(-a * t) / a; };
      // u(t) = amp(t) * wave, so each snapshot's shell norms are |amp(t)| times the wave's
      lp::ShellSeries series{range, {}, {}};
      const std::vector<double> base = lp::shell_norms(wave, 2.0, range);
      for (double t : times) {
        std::vector<double> v = base;
        for (double& x : v) x *= std::abs(amp(t));
        series.push(t, std::move(v));
      }
      const double data = kind == 0 ? b0 : T * b0;
      const double e1 = -std::expm1(-a * T);
      for (int ri = 0; ri < 3; ++ri) {
        const double r = rs[ri];
        const double weight = std::isinf(r) ? 0.0 : 2.0 / r;
        const double got = lp::chemin_lerner_norm(series, r, s + weight, lp::kInf);
        double integral;  // (int_0^T amp^r)^(1/r) in closed form
        if (kind == 0) {
          integral = std::isinf(r) ? 1.0 : std::pow(-std::expm1(-r * a * T) / (r * a), 1.0 / r);
        } else if (r == 1.0) {
          integral = (T - e1 / a) / a;
        } else if (r == 2.0) {
          integral = std::sqrt(T - 2.0 * e1 / a - std::expm1(-2.0 * a * T) / (2.0 * a)) / a;
        } else {
          integral = e1 / a;
        }
        const double want = std::pow(2.0, j * (s + weight)) * wave_p * integral;
        worst_oracle = std::max(worst_oracle, std::abs(got - want) / want);
        const double ratio = got / data;
        worst_C = std::max(worst_C, ratio);
        if (kind == 0) free_C[ri].push_back(ratio);
      }
    }
  }
  c.measured.emplace_back("oracle_rel_err", worst_oracle);
  c.measured.emplace_back("sup_C", worst_C);
  double worst_spread = 0.0;
  for (int ri = 0; ri < 3; ++ri) {
    const double sp = spread(free_C[ri]);
    worst_spread = std::max(worst_spread, sp);
    c.measured.emplace_back("free_spread_r" + p_label(rs[ri]), sp);
  }
  c.tolerance = 1e-3;
  decide(c, worst_oracle <= c.tolerance && worst_spread <= 0.25 && std::isfinite(worst_C));
  return c;
}

Report verify_analysis_suite(const GridSpec& g, std::uint64_t seed) {
  Report r;
  r.suite = "analysis";
  r.env = {{"n", std::to_string(g.n())}, {"L", key("", g.length())}, {"seed", std::to_string(seed)}};
  const auto shells = stable_shells(g);
  r.checks.push_back(check_partition(g));
  r.checks.push_back(check_orthogonality(g, seed));
  r.checks.push_back(check_bony(g, seed + 1));
  r.checks.push_back(check_bernstein(g, shells, seed + 2));
  r.checks.push_back(check_poincare(g, shells, seed + 3));
  r.checks.push_back(check_interpolation(g, seed + 4));
  r.checks.push_back(check_product(g, shells, seed + 5));
  r.checks.push_back(check_heat_regularity(g, seed + 6));
  return r;
}

// =================================================================== green

Check check_reduced_vs_ode(std::uint64_t seed, int samples, double rho_max, double t_max) {
  Check c = make_check("green-reduced-closed-form", "closed-form pair propagator vs fine-step RK4, max rel err");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double rho = rho_max * ur(rng), t = t_max * ur(rng);
    const double s = std::sqrt(1 + rho * rho);
    const Mat2 want = rk4_pair(rho, t);
    const Mat2 got = green::reduced_green_shifted(rho, t, (rho * rho + 1 - s) * t);
    worst = std::max(worst, (got - want).norm() / want.norm());
  }
  c.measured = {{"max_rel_err", worst}, {"samples", static_cast<double>(samples)}};
  c.tolerance = 1e-8;
  decide(c, worst <= c.tolerance);
  return c;
}

Check check_full_vs_reduced(std::uint64_t seed, int modes) {
  Check c = make_check("green-full-vs-reduced", "6x6 exponential carried to transformed amplitudes vs pair propagator");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto cplx = [&] { return Complex(nd(rng), nd(rng)); };
  double worst = 0.0;
  for (int trial = 0; trial < modes; ++trial) {
    Eigen::Vector3d x(nd(rng), nd(rng), nd(rng));
    x *= std::exp(nd(rng));
    const double rho = x.norm(), t = 2 * std::abs(nd(rng));
    Eigen::Vector3cd u(cplx(), cplx(), cplx()), w(cplx(), cplx(), cplx());
    u -= x.cast<Complex>() * (x.cast<Complex>().dot(u)) / (rho * rho);
    green::Vec6 v;
    v << u, w;
    const green::Vec6 r = green::full_green_eval({x(0), x(1), x(2)}, t) * v;
    const auto via_full = transform_mode(x, r.head<3>(), r.tail<3>());
    const auto init = transform_mode(x, u, w);
    const Mat2 gm = green::reduced_green_eval(rho, t);
    Eigen::Matrix<Complex, 7, 1> via_reduced;
    for (int e = 0; e < 3; ++e) {
      via_reduced(e) = gm(0, 0) * init(e) + gm(0, 1) * init(3 + e);
      via_reduced(3 + e) = gm(1, 0) * init(e) + gm(1, 1) * init(3 + e);
    }
    via_reduced(6) = std::exp(-(2 * rho * rho + 2) * t) * init(6);
    worst = std::max(worst, (via_full - via_reduced).norm() / std::max(via_reduced.norm(), 1e-300));
  }
  c.measured = {{"max_rel_err", worst}, {"modes", static_cast<double>(modes)}};
  c.tolerance = 1e-8;
  decide(c, worst <= c.tolerance);
  return c;
}

Check check_generator_eigenvalues(int samples) {
  Check c = make_check("green-symbol-eigenvalues", "eigenvalues of the 2x2 symbol vs rho^2 + 1 -+ sqrt(1 + rho^2)");
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double rho = 0.01 + 0.3 * i;
    Eigen::SelfAdjointEigenSolver<Mat2> es(-green::reduced_generator(rho));
    const double s = std::sqrt(1 + rho * rho);
    const double lo = (rho * rho * rho * rho + rho * rho) / (rho * rho + 1 + s);
    const double hi = rho * rho + 1 + s;
    worst = std::max({worst, std::abs(es.eigenvalues()(0) - lo) / lo, std::abs(es.eigenvalues()(1) - hi) / hi});
  }
  c.measured = {{"max_rel_err", worst}};
  c.tolerance = 1e-12;
  decide(c, worst <= c.tolerance);
  return c;
}

Check check_propagator_bounded() {
  Check c = make_check("green-uniform-bound", "max operator norm of the pair propagator over rho in [0.01, 30], t in [0, 10]");
  double worst = 0.0;
  for (double rho : green::geometric_grid(0.01, 30.0, 60))
    for (double t : green::geometric_grid(1e-3, 10.0, 60)) {
      Eigen::JacobiSVD<Mat2> svd(green::reduced_green_eval(rho, t));
      worst = std::max(worst, svd.singularValues()(0));
    }
  c.measured = {{"max_op_norm", worst}};
  c.tolerance = 1.05;
  decide(c, worst <= c.tolerance);
  return c;
}

Check check_semigroup(std::uint64_t seed) {
  Check c = make_check("green-semigroup", "max |G(t)G(s) - G(t+s)| / |G(t+s)|");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double rho = 30 * ur(rng), t = 5 * ur(rng), s = 5 * ur(rng);
    const Mat2 rhs = green::reduced_green_eval(rho, t + s);
    const double scale = rhs.norm();
    if (scale < 1e-250) continue;
    worst = std::max(worst, (green::reduced_green_eval(rho, t) * green::reduced_green_eval(rho, s) - rhs).norm() / scale);
  }
  c.measured = {{"max_rel_err", worst}};
  c.tolerance = 1e-11;
  decide(c, worst <= c.tolerance);
  return c;
}

Check check_bound_scan(int order, int points) {
  Check c = make_check(key("green-derivative-bound-order", order),
                       "sup rho^|a| |d_rho^a G| exp(rho^2 t / 3) over rho in [0.1, 30], t in [0.01, 10]; 2x refinement");
  const auto coarse = green::scan_derivative_bounds(order, green::geometric_grid(0.1, 30.0, points),
                                                    green::geometric_grid(0.01, 10.0, points), lp::kInf);
  const auto fine = green::scan_derivative_bounds(order, green::geometric_grid(0.1, 30.0, 2 * points - 1),
                                                  green::geometric_grid(0.01, 10.0, 2 * points - 1), lp::kInf);
  const double drift = std::abs(fine.sup / coarse.sup - 1.0);
  c.measured = {{"sup", coarse.sup},
                {"sup_refined", fine.sup},
                {"refinement_drift", drift},
                {"arg_rho", coarse.arg_rho},
                {"arg_t", coarse.arg_t}};
  c.tolerance = 0.05;
  decide(c, coarse.finite && fine.finite && std::isfinite(coarse.sup) && drift <= c.tolerance);
  return c;
}

std::vector<SmoothingFit> smoothing_fits(int n, const std::vector<int>& shells, double p, bool full,
                                         std::uint64_t seed) {
  std::vector<SmoothingFit> out;
  const std::vector<double> taus = [] {
    std::vector<double> v;
    for (int i = 0; i <= 12; ++i) v.push_back(0.25 * i);
    return v;
  }();
  const int oversample = std::isinf(p) ? 2 : 1;
  for (int j : shells) {
    // lattice unit 2^j / 4: the annulus of shell j sits at |k| in (4, 32/3)
    const GridSpec g(n, 8.0 * kPi * std::ldexp(1.0, -j));
    const double lambda2 = std::ldexp(1.0, 2 * j);
    std::vector<double> ratio;
    if (!full) {
      const ScalarField a0 = shell_wave_packets(g, j, seed), w0 = shell_wave_packets(g, j, seed + 1);
      const double norm0 = spectral::lp_norm(a0, p, oversample) + spectral::lp_norm(w0, p, oversample);
      for (double tau : taus) {
        const double t = tau / lambda2;
        ScalarField a(g, true), w(g, true);
        const std::size_t mmax = 3 * static_cast<std::size_t>(n / 2) * (n / 2);
        std::vector<Mat2> gm(mmax + 1);
        for (std::size_t m = 0; m <= mmax; ++m) gm[m] = green::reduced_green_eval(g.unit() * std::sqrt(double(m)), t);
        for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
          const Mat2& G = gm[static_cast<std::size_t>(lp::mode_norm2(kx, ky, kz))];
          a[idx] = G(0, 0) * a0[idx] + G(0, 1) * w0[idx];
          w[idx] = G(1, 0) * a0[idx] + G(1, 1) * w0[idx];
        });
        ratio.push_back((spectral::lp_norm(a, p, oversample) + spectral::lp_norm(w, p, oversample)) / norm0);
      }
    } else {
      VectorField raw(g, true), w0(g, true);
      for (int i = 0; i < 3; ++i) {
        raw[i] = shell_wave_packets(g, j, seed + i);
        w0[i] = shell_wave_packets(g, j, seed + 3 + i);
      }
      const State s0{spectral::leray_project(raw), w0, 0.0};
      auto norm = [&](const State& s) {
        double total = 0.0;
        for (int i = 0; i < 3; ++i) total += spectral::lp_norm(s.u[i], p, oversample) + spectral::lp_norm(s.omega[i], p, oversample);
        return total;
      };
      const double norm0 = norm(s0);
      for (double tau : taus) ratio.push_back(norm(green::apply_full_green(s0, tau / lambda2)) / norm0);
    }
    std::vector<double> y;
    for (double r : ratio) y.push_back(std::log(r));
    const auto [slope, intercept] = fit_line(taus, y);
    (void)intercept;
    SmoothingFit fit;
    fit.shell = j;
    fit.c = -slope;
    for (std::size_t i = 0; i < taus.size(); ++i) fit.C = std::max(fit.C, ratio[i] * std::exp(fit.c * taus[i]));
    out.push_back(fit);
  }
  return out;
}

Check check_lp_smoothing(int n, const std::vector<int>& shells, double p, std::uint64_t seed) {
  Check c = make_check("green-lp-smoothing-p" + p_label(p),
                       "fit ||G(t) f||_p <= C exp(-c 4^j t) ||f||_p per shell; c > 0 and (C, c) drift across shells");
  const auto fits = smoothing_fits(n, shells, p, false, seed);
  std::vector<double> cs, Cs;
  bool positive = true;
  for (const auto& f : fits) {
    c.measured.emplace_back(key("c_j", f.shell), f.c);
    c.measured.emplace_back(key("C_j", f.shell), f.C);
    cs.push_back(f.c);
    Cs.push_back(f.C);
    positive = positive && f.c > 0.0;
  }
  const double dc = spread(cs), dC = spread(Cs);
  c.measured.emplace_back("c_drift", dc);
  c.measured.emplace_back("C_drift", dC);
  c.tolerance = 0.25;
  decide(c, positive && dc <= c.tolerance && dC <= c.tolerance);
  return c;
}

Check contrast_full_smoothing(int n, const std::vector<int>& shells, double p, std::uint64_t seed) {
  Check c = make_check("green-lp-smoothing-untransformed-p" + p_label(p),
                       "same fit applied to the 6x6 propagator on (u, omega); contrast only");
  const auto fits = smoothing_fits(n, shells, p, true, seed);
  std::vector<double> cs, Cs;
  for (const auto& f : fits) {
    c.measured.emplace_back(key("c_j", f.shell), f.c);
    c.measured.emplace_back(key("C_j", f.shell), f.C);
    cs.push_back(f.c);
    Cs.push_back(f.C);
  }
  c.measured.emplace_back("c_drift", spread(cs));
  c.measured.emplace_back("C_drift", spread(Cs));
  c.verdict = Verdict::REPORT;
  return c;
}

Report verify_green_suite(const GreenPreset& preset, std::uint64_t seed) {
  Report r;
  r.suite = "green";
  std::ostringstream shells;
  for (std::size_t i = 0; i < preset.shells.size(); ++i) shells << (i ? "," : "") << preset.shells[i];
  r.env = {{"n", std::to_string(preset.n)}, {"shells", shells.str()}, {"seed", std::to_string(seed)}};
  r.checks.push_back(check_reduced_vs_ode(seed, preset.samples));
  r.checks.push_back(check_full_vs_reduced(seed + 1, preset.modes));
  r.checks.push_back(check_generator_eigenvalues());
  r.checks.push_back(check_propagator_bounded());
  r.checks.push_back(check_semigroup(seed + 2));
  for (int order = 0; order <= 2; ++order) r.checks.push_back(check_bound_scan(order));
  for (double p : preset.exponents) r.checks.push_back(check_lp_smoothing(preset.n, preset.shells, p, seed + 3));
  r.checks.push_back(contrast_full_smoothing(preset.n, preset.shells, lp::kInf, seed + 3));
  return r;
}

// ================================================================ dynamics

double oscillation_norm(const GridSpec& g, int K, double p, int frame_n, int oversample) {
  const GridSpec frame(frame_n, g.length());
  const ScalarField env = gaussian_bump(frame);
  const lp::ShellRange range = lp::resolved_shells(g);
  const double cut = g.dealias_cutoff_index();
  const double cell = std::pow(g.length() / (frame_n * oversample), 3);
  std::vector<double> shells;
  for (int j = range.j_min; j <= range.j_max; ++j) {
    ScalarField piece(frame, false);
    bool any = false;
    for_each_mode(frame, [&](std::size_t idx, int kx, int ky, int kz) {
      const int sx = kx + K;  // lattice index of this envelope mode after modulation
      if (std::abs(sx) > cut || std::abs(ky) > cut || std::abs(kz) > cut) return;
      const double r = g.unit() * std::sqrt(double(sx) * sx + double(ky) * ky + double(kz) * kz);
      const double w = lp::phi(std::ldexp(r, -j));
      if (w == 0.0) return;
      piece[idx] = w * env[idx];
      any = true;
    });
    shells.push_back(any ? spectral::lp_norm_samples(spectral::to_physical_refined(piece, oversample), p, cell) : 0.0);
  }
  return lp::weighted_lq(shells, range, 3.0 / p - 1.0, lp::kInf);
}

Check check_oscillation(const GridSpec& g, double p, const std::vector<int>& ms) {
  Check c = make_check("oscillation-scaling-p" + p_label(p),
                       "slope of log ||exp(i x1/eps) phi||_{B^{3/p-1}_{p,inf}} vs log eps, target 1 - 3/p");
  std::vector<double> x, y;
  for (int m : ms) {
    const int K = 1 << m;
    oscillation_index(DataFamily{DataKind::CANNONE_OSC, 1.0, g.length() / (2.0 * kPi * K), 0, 0, 0.0}, g);
    const double norm = oscillation_norm(g, K, p);
    x.push_back(std::log(g.length() / (2.0 * kPi * K)));
    y.push_back(std::log(norm));
    c.measured.emplace_back(key("norm_K", K), norm);
  }
  const double slope = fit_line(x, y).first;
  const double target = 1.0 - 3.0 / p;
  const std::size_t last = x.size() - 1;
  c.measured.emplace_back("slope", slope);
  c.measured.emplace_back("target", target);
  c.measured.emplace_back("finest_pair_slope", (y[last] - y[last - 1]) / (x[last] - x[last - 1]));
  c.tolerance = 0.1;
  decide(c, std::abs(slope - target) <= c.tolerance);
  return c;
}

RunOptions dynamics_run_options(const DynamicsPreset& preset) {
  RunOptions o;
  const double p = preset.exponents.front();
  for (int order = 0; order <= 2; ++order) {
    Probe pr;
    pr.bp = {3.0 / p - 1.0, p, lp::kInf};
    pr.order = order;
    o.probes.push_back(pr);
  }
  o.shell_record_p = preset.exponents;
  return o;
}

namespace {

std::vector<double> shell_besov_series(const lp::ShellSeries& s, double p) {
  std::vector<double> out;
  for (const auto& v : s.values) out.push_back(lp::weighted_lq(v, s.range, 3.0 / p - 1.0, lp::kInf));
  return out;
}

lp::ShellSeries window(const lp::ShellSeries& s, double lo, double hi) {
  lp::ShellSeries w{s.range, {}, {}};
  for (std::size_t i = 0; i < s.times.size(); ++i)
    if (s.times[i] >= lo - 1e-9 && s.times[i] <= hi + 1e-9) w.push(s.times[i], s.values[i]);
  return w;
}

}  // namespace

std::vector<Check> dynamics_checks(const TimeSeries& series, const DynamicsPreset& preset) {
  std::vector<Check> out;
  const auto opts = dynamics_run_options(preset);
  const std::vector<double> t = series.values("t");
  const double p0 = preset.exponents.front();
  std::vector<std::vector<double>> probe(3);
  for (int o = 0; o < 3; ++o) probe[o] = series.values(default_probe_name(opts.probes[o]));

  {
    Check c = make_check("no-blow-up", "small-data run reaches t_end with finite coefficients");
    c.measured = {{"t_reached", t.empty() ? 0.0 : t.back()}, {"t_end", preset.integrator.t_end}};
    decide(c, !series.blew_up && !t.empty() && std::abs(t.back() - preset.integrator.t_end) < 1e-9);
    out.push_back(c);
  }
  for (std::size_t k = 0; k < preset.exponents.size(); ++k) {
    const double p = preset.exponents[k];
    Check c = make_check("boundedness-p" + p_label(p),
                         "M = sup_t ||(u,omega)(t)||_{B^{3/p-1}_{p,inf}} / initial");
    std::vector<double> b;
    if (k == 0) {
      b = probe[0];
      c.what += " (component norms summed)";
    } else {
      b = shell_besov_series(series.shell_records[k], p);
      c.what += " (shell norms summed over components)";
    }
    double m = 0.0;
    for (double v : b) m = std::max(m, v / b.front());
    c.measured = {{"M", m}, {"initial", b.empty() ? 0.0 : b.front()}};
    c.tolerance = 10.0;
    decide(c, !b.empty() && b.front() > 0.0 && std::isfinite(m) && m <= c.tolerance && !series.blew_up);
    out.push_back(c);
  }
  {
    Check c = make_check("divergence-free", "max over samples of max_k |xi.u| / max_k |xi||u|");
    double m = 0.0;
    for (double v : series.values("div_residual")) m = std::max(m, v);
    c.measured = {{"max_residual", m}};
    c.tolerance = 1e-10;
    decide(c, m <= c.tolerance);
    out.push_back(c);
  }
  {
    Check c = make_check("energy-nonincreasing", "max_i (E(t_{i+1}) - E(t_i)) / E(0)");
    const auto e = series.values("energy");
    double m = -lp::kInf;
    for (std::size_t i = 1; i < e.size(); ++i) m = std::max(m, (e[i] - e[i - 1]) / e.front());
    c.measured = {{"max_increase", e.size() > 1 ? m : 0.0}};
    c.tolerance = 1e-12;
    decide(c, e.size() > 1 && m <= c.tolerance);
    out.push_back(c);
  }
  auto slope_over = [&](const std::vector<double>& b, double lo, double hi) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] >= lo - 1e-9 && t[i] <= hi + 1e-9 && b[i] > 0.0) {
        x.push_back(std::log(t[i]));
        y.push_back(std::log(b[i]));
      }
    return x.size() >= 2 ? fit_line(x, y).first : std::numeric_limits<double>::quiet_NaN();
  };
  const double t_end = preset.integrator.t_end;
  for (int o = 1; o <= 2; ++o) {
    Check c = make_check(key("decay-order", o), "slope of log ||D^a (u,omega)||_{B^{3/p-1}_{p,inf}} vs log t, |a| summed");
    const double slope = slope_over(probe[o], preset.decay_from, t_end);
    double c0 = 0.0;  // smallest C0 with ||D^a (u, omega)|| <= C0 t^{-|a|/2} on the window
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] >= preset.decay_from - 1e-9) c0 = std::max(c0, probe[o][i] * std::pow(t[i], 0.5 * o));
    c.measured = {{"slope", slope}, {"target", -0.5 * o}, {"C0", c0}, {"p", p0}};
    c.tolerance = 0.15;
    decide(c, std::isfinite(slope) && std::abs(slope + 0.5 * o) <= c.tolerance);
    out.push_back(c);
  }
  {
    Check c = make_check("decay-order0-flat", "slope of log ||(u,omega)||_{B^{3/p-1}_{p,inf}} vs log t on the late window");
    const double slope = slope_over(probe[0], preset.flat_from, t_end);
    c.measured = {{"slope", slope}, {"from", preset.flat_from}};
    c.tolerance = 0.05;
    decide(c, std::isfinite(slope) && std::abs(slope) <= c.tolerance);
    out.push_back(c);
  }
  {
    Check c = make_check("continuation-monitor", "sup_j int ||Delta_j curl u||_inf dt over consecutive windows, nonincreasing");
    const double w = std::max(t_end / 5.0, preset.integrator.dt);
    double prev = lp::kInf;
    bool mono = true;
    int idx = 0;
    for (double lo = 0.0; lo + w <= t_end + 1e-9; lo += w, ++idx) {
      const double v = continuation_monitor(window(series.curl_series, lo, lo + w), 0.0);
      c.measured.emplace_back(key("window", idx), v);
      mono = mono && v <= prev * (1.0 + 1e-12);
      prev = v;
    }
    decide(c, mono && idx > 1);
    out.push_back(c);
  }
  for (std::size_t k = 0; k < preset.exponents.size(); ++k) {
    const double p = preset.exponents[k];
    Check c = make_check("a-priori-ledger-p" + p_label(p),
                         "E^p_T = L~inf B^{3/p-1} + L~1 B^{3/p+1}; implied C = E / (initial + E^2)");
    const auto& rec = series.shell_records[k];
    if (rec.times.size() >= 2) {
      const double e_inf = lp::chemin_lerner_norm(rec, lp::kInf, 3.0 / p - 1.0, lp::kInf);
      const double e_one = lp::chemin_lerner_norm(rec, 1.0, 3.0 / p + 1.0, lp::kInf);
      const double init = lp::weighted_lq(rec.values.front(), rec.range, 3.0 / p - 1.0, lp::kInf);
      const double e = e_inf + e_one;
      c.measured = {{"E", e}, {"linf_part", e_inf}, {"l1_part", e_one}, {"initial", init},
                    {"quadratic", e * e}, {"implied_C", e / (init + e * e)}};
    }
    c.verdict = Verdict::REPORT;
    out.push_back(c);
  }
  return out;
}

Report verify_dynamics_suite(const DynamicsPreset& preset, std::uint64_t seed, TimeSeries* series_out) {
  Report r;
  r.suite = "dynamics";
  r.env = {{"n", std::to_string(preset.n)},
           {"L", key("", preset.length)},
           {"scheme", scheme_name(preset.integrator.scheme)},
           {"dt", key("", preset.integrator.dt)},
           {"t_end", key("", preset.integrator.t_end)},
           {"data", data_kind_name(preset.data.kind)},
           {"seed", std::to_string(seed)}};
  const GridSpec g(preset.n, preset.length);
  DataFamily fam = preset.data;
  fam.seed = seed;
  const State s0 = make_initial_data(fam, g);
  TimeSeries local;
  TimeSeries& series = series_out ? *series_out : local;
  try {
    run(s0, preset.integrator, dynamics_run_options(preset), series);
  } catch (const BlowUpError& e) {
    r.env.emplace_back("error", e.what());
  }
  r.append(dynamics_checks(series, preset));
  const GridSpec og(preset.oscillation_n, preset.oscillation_length);
  for (double p : {4.0, 6.0}) r.checks.push_back(check_oscillation(og, p));
  return r;
}

Check check_formulation_equivalence(const GridSpec& g, const DataFamily& data, double dt, double t_end, int ratio,
                                    double tolerance) {
  Check c = make_check("formulation-equivalence",
                       "transformed ETDRK2 vs primitive REF_RK4 at dt / ratio: rel L2 of (u, omega) at t_end");
  const State s0 = make_initial_data(data, g);
  IntegratorConfig etd{dt, Scheme::ETDRK2, t_end, 1, true, true, {}};
  IntegratorConfig ref{dt / ratio, Scheme::REF_RK4, t_end, 1, true, true, {}};
  validate(etd, g);
  validate(ref, g);
  Stepper a(s0, etd), b(s0, ref);
  for (long i = 0; i < step_count(etd); ++i) a.step();
  for (long i = 0; i < step_count(ref); ++i) b.step();
  const State& x = a.state();
  const State& y = b.state();
  const double diff = std::hypot(spectral::l2_norm(x.u - y.u), spectral::l2_norm(x.omega - y.omega));
  const double base = std::hypot(spectral::l2_norm(y.u), spectral::l2_norm(y.omega));
  const double lin = std::hypot(spectral::l2_norm(x.u - s0.u), spectral::l2_norm(x.omega - s0.omega));
  c.measured = {{"rel_l2", diff / base}, {"t", x.t}, {"dt", dt}, {"dt_ref", dt / ratio}, {"state_change", lin / base}};
  c.tolerance = tolerance;
  decide(c, diff / base <= tolerance);
  return c;
}

}  // namespace micropolar::verify
