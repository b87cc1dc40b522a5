#include <cmath>
#include <random>

#include "doctest.h"
#include "micropolar/errors.hpp"
#include "micropolar/green.hpp"
#include "micropolar/integrator.hpp"
#include "micropolar/parallel.hpp"
#include "micropolar/spectral.hpp"
#include "support.hpp"

using namespace micropolar;
using testing_support::max_abs;
using testing_support::max_diff;
using testing_support::random_vector;

namespace {

State random_state(const GridSpec& g, std::uint64_t seed, int kmax, double amp) {
  std::mt19937_64 rng(seed);
  State s{spectral::leray_project(random_vector(g, rng, kmax)), random_vector(g, rng, kmax), 0.0};
  s.u *= amp;
  s.omega *= amp;
  return s;
}

double rel_l2(const State& a, const State& b) {
  const double num = std::hypot(spectral::l2_norm(a.u - b.u), spectral::l2_norm(a.omega - b.omega));
  const double den = std::hypot(spectral::l2_norm(b.u), spectral::l2_norm(b.omega));
  return num / den;
}

double state_max(const State& s) { return std::max(max_abs(s.u), max_abs(s.omega)); }

State integrate(const State& s0, IntegratorConfig cfg) {
  Stepper st(s0, cfg);
  for (long i = 0; i < step_count(cfg); ++i) st.step();
  return st.state();
}

}  // namespace

TEST_CASE("linear test mode: ETD steps reproduce the exact semigroups") {
  const GridSpec g(16, 2 * kPi);
  const State s0 = random_state(g, 1, 5, 1.0);
  for (Scheme sc : {Scheme::ETD1, Scheme::ETDRK2}) {
    IntegratorConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 0.05;
    cfg.scheme = sc;
    cfg.nonlinear = false;
    Stepper st(s0, cfg);
    st.step();
    const TransformedState exact = green::apply_semigroups(transform(s0), 0.05);
    CHECK(transformed_distance(st.transformed(), exact) <= 1e-13 * state_max(s0));
  }
}

TEST_CASE("linear test mode: REF_RK4 matches the semigroups at low frequency") {
  // RK4's local error is (lambda h)^5 / 120; a large box keeps it below 1e-12.
  const GridSpec g(16, 32 * kPi);
  const State s0 = random_state(g, 2, 5, 1.0);
  IntegratorConfig cfg;
  cfg.scheme = Scheme::REF_RK4;
  cfg.dt = 1e-3;
  cfg.t_end = 1e-3;
  cfg.nonlinear = false;
  Stepper st(s0, cfg);
  st.step();
  const TransformedState exact = green::apply_semigroups(transform(s0), 1e-3);
  CHECK(transformed_distance(st.transformed(), exact) <= 1e-12 * state_max(s0));
}

TEST_CASE("transformed and primitive states stay synchronized") {
  const GridSpec g(16, 2 * kPi);
  State s0 = random_state(g, 3, 4, 0.3);
  s0.omega[2][0] = 0.7;  // a mean the transformed split cannot see
  IntegratorConfig cfg;
  cfg.dt = 0.02;
  cfg.t_end = 0.2;
  Stepper st(s0, cfg);
  for (int i = 0; i < 10; ++i) {
    st.step();
    const double scale = state_max(st.state());
    CHECK(transformed_distance(transform(st.state()), st.transformed()) <= 1e-9 * scale);
    CHECK(spectral::divergence_residual(st.state().u) <= 1e-10);
    for (int c = 0; c < 3; ++c) {
      CHECK(st.state().u[c].reality_defect() <= 1e-10);
      CHECK(st.state().omega[c].reality_defect() <= 1e-10);
    }
  }
  CHECK(std::abs(st.state().omega[2][0] - 0.7 * std::exp(-2 * 0.2)) <= 1e-13);

  auto [ts1, s1] = step(transform(s0), s0, cfg);
  CHECK(s1.t == doctest::Approx(0.02));
  State bad = s0;
  bad.u[0][1] += 1.0;
  CHECK_THROWS_AS(step(transform(s0), bad, cfg), ConsistencyError);
}

TEST_CASE("ETDRK2 converges at second order (Richardson)") {
  const GridSpec g(32, 32 * kPi);
  DataFamily fam;
  fam.target_norm = 0.05;
  const State s0 = make_initial_data(fam, g);
  IntegratorConfig cfg;
  cfg.t_end = 0.8;
  std::vector<State> sol, sol1;
  for (double dt : {0.2, 0.1, 0.05}) {
    cfg.dt = dt;
    cfg.scheme = Scheme::ETDRK2;
    sol.push_back(integrate(s0, cfg));
    cfg.scheme = Scheme::ETD1;
    sol1.push_back(integrate(s0, cfg));
  }
  const double e1 = rel_l2(sol[0], sol[1]);
  const double e2 = rel_l2(sol[1], sol[2]);
  MESSAGE("ETDRK2 self-convergence differences " << e1 << ", " << e2);
  CHECK(e2 > 1e-13);
  CHECK(std::log2(e1 / e2) >= 1.8);
  const double order1 = std::log2(rel_l2(sol1[0], sol1[1]) / rel_l2(sol1[1], sol1[2]));
  CHECK(order1 == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("ETDRK2 agrees with the untransformed RK4 reference at dt/50") {
  const GridSpec g(32, 32 * kPi);
  DataFamily fam;
  fam.target_norm = 0.01;
  const State s0 = make_initial_data(fam, g);
  IntegratorConfig cfg;
  cfg.dt = 0.25;
  cfg.t_end = 1.0;
  const State a = integrate(s0, cfg);
  cfg.scheme = Scheme::REF_RK4;
  cfg.dt = 0.25 / 50;
  REQUIRE(cfg.dt <= rk4_stability_bound(g));
  const State b = integrate(s0, cfg);
  const double err = rel_l2(a, b);
  MESSAGE("ETDRK2 vs RK4 relative L2 difference " << err);
  CHECK(err <= 1e-5);
}

TEST_CASE("REF_RK4 refuses steps above its stability bound") {
  const GridSpec g(16, 2 * kPi);
  IntegratorConfig cfg;
  cfg.scheme = Scheme::REF_RK4;
  const double bound = rk4_stability_bound(g);
  // 2 rho^2 + 2 at the retained corner is the top of the spectrum at defaults
  CHECK(linear_spectral_radius(g) == doctest::Approx(2 * g.max_retained_xi2() + 2).epsilon(1e-12));
  cfg.dt = bound * 1.01;
  cfg.t_end = cfg.dt;
  const auto v = config_violations(cfg, g);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("stability bound") != std::string::npos);
  cfg.dt = bound * 0.99;
  cfg.t_end = cfg.dt;
  CHECK(config_violations(cfg, g).empty());

  IntegratorConfig etd;
  etd.params.kappa = 2.0;
  etd.t_end = 0.25;
  etd.dt = 0.1;
  CHECK(config_violations(etd, g).size() == 2);
  CHECK_THROWS_AS(validate(etd, g), ValidationError);
}

TEST_CASE("REF_RK4 honours general coefficients") {
  // A longitudinal micro-rotation mode decays at (mu + kappa) rho^2 + 4 chi and
  // never drives the velocity.
  const GridSpec g(16, 32 * kPi);
  PhysicalParams p{0.3, 0.2, 0.7, 1.5};
  State s{VectorField(g, true), VectorField(g, true), 0.0};
  const std::array<int, 3> k{2, 0, 0};
  s.omega[0] = spectral::plane_wave(g, k, 1.0) + spectral::plane_wave(g, {-2, 0, 0}, 1.0);
  IntegratorConfig cfg;
  cfg.scheme = Scheme::REF_RK4;
  cfg.params = p;
  cfg.dt = 1e-2;
  cfg.t_end = 0.5;
  cfg.nonlinear = false;
  const State out = integrate(s, cfg);
  const double r2 = std::pow(2 * g.unit(), 2);
  const double rate = (p.mu + p.kappa) * r2 + 4 * p.chi;
  const std::size_t idx = g.index(2, 0, 0);
  CHECK(out.omega[0][idx].real() == doctest::Approx(std::exp(-rate * 0.5)).epsilon(1e-9));
  CHECK(max_abs(out.u) <= 1e-14);
}

TEST_CASE("non-finite coefficients raise a blow-up error with time and shell") {
  const GridSpec g(16, 2 * kPi);
  State s0 = random_state(g, 4, 3, 0.1);
  IntegratorConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 0.3;
  const std::size_t idx = g.index(4, 0, 0);
  s0.omega[1][idx] = Complex(std::nan(""), 0.0);
  try {
    Stepper st(s0, cfg);
    st.step();
    FAIL("expected BlowUpError");
  } catch (const BlowUpError& e) {
    CHECK(e.time() == doctest::Approx(0.1));
    CHECK(e.shell() >= lp::lattice_shells(g).j_min - 1);
  }
  TimeSeries ts;
  CHECK_THROWS_AS(run(s0, cfg, {}, ts), BlowUpError);
  CHECK(ts.blew_up);
  CHECK(ts.rows.size() == 1);  // partial series kept
}

TEST_CASE("initial data families") {
  const GridSpec g(64, 32 * kPi);
  SUBCASE("zero amplitude gives the zero state") {
    for (DataKind k : {DataKind::GAUSSIAN, DataKind::CANNONE_OSC, DataKind::SHELL_RANDOM}) {
      DataFamily f;
      f.kind = k;
      f.amplitude = 0.0;
      f.eps = 1.0 / (4 * g.unit());
      f.target_norm = 0.01;
      const State s = make_initial_data(f, g);
      CHECK(state_max(s) == 0.0);
    }
  }
  SUBCASE("oscillating data is divergence free and honours the eps/L rule") {
    for (int K : {2, 4, 8, 16}) {
      DataFamily f;
      f.kind = DataKind::CANNONE_OSC;
      f.eps = 1.0 / (K * g.unit());
      const State s = make_initial_data(f, g);
      CHECK(spectral::divergence_residual(s.u) <= 1e-12);
      CHECK_FALSE(s.omega.is_real());
      CHECK(s.u[0].reality_defect() <= 1e-12);
      CHECK(oscillation_index(f, g) == K);
    }
    DataFamily f;
    f.kind = DataKind::CANNONE_OSC;
    f.eps = 1.0 / (4.5 * g.unit());
    try {
      make_initial_data(f, g);
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("eps/L") != std::string::npos);
    }
  }
  SUBCASE("gaussian data: boundary mass, normalization, divergence") {
    const ScalarField phi = gaussian_bump(g);
    const auto x = phi.to_physical();
    CHECK(std::abs(x[0]) <= 1e-12);
    DataFamily f;
    f.target_norm = 0.01;
    const State s = make_initial_data(f, g);
    const lp::BesovParams bp{0.5, 2.0, lp::kInf};
    CHECK(lp::besov_norm(s.u, bp) + lp::besov_norm(s.omega, bp) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(spectral::divergence_residual(s.u) <= 1e-12);
  }
  SUBCASE("shell packets live in the requested shell") {
    const ScalarField f = shell_wave_packets(g, 0, 7);
    CHECK(f.reality_defect() <= 1e-12);
    double inside = 0, total = 0;
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
      const double r = g.unit() * std::sqrt(double(lp::mode_norm2(kx, ky, kz)));
      const double w = std::norm(f[idx]);
      total += w;
      if (r > 1.0 && r < 8.0 / 3.0) inside += w;
    });
    CHECK(total > 0);
    CHECK(inside == doctest::Approx(total).epsilon(1e-14));
    DataFamily fam;
    fam.kind = DataKind::SHELL_RANDOM;
    fam.shell = 0;
    fam.seed = 3;
    const State s = make_initial_data(fam, g);
    CHECK(spectral::divergence_residual(s.u) <= 1e-12);
  }
}

TEST_CASE("run: zero data gives an all-zero series") {
  const GridSpec g(16, 2 * kPi);
  State s0{VectorField(g), VectorField(g), 0.0};
  IntegratorConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 0.5;
  cfg.sample_stride = 2;
  RunOptions opt;
  opt.probes.push_back(Probe{});
  const TimeSeries ts = run(s0, cfg, opt);
  REQUIRE(ts.rows.size() == 4);  // steps 0, 2, 4 and the final 5
  CHECK(ts.columns.front() == "t");
  CHECK(ts.columns.back() == "continuation");
  for (const auto& r : ts.rows)
    for (std::size_t c = 1; c < r.size(); ++c) CHECK(r[c] == 0.0);
  CHECK(ts.rows.back()[0] == doctest::Approx(0.5));
}

TEST_CASE("run: energy nonincreasing and thread-count independent output") {
  const GridSpec g(16, 2 * kPi);
  DataFamily fam;
  fam.amplitude = 1.0;
  const State s0 = make_initial_data(fam, g);
  IntegratorConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 1.0;
  RunOptions opt;
  Probe p;
  opt.probes.push_back(p);
  p.order = 1;
  opt.probes.push_back(p);
  opt.shell_record_p = {2.0};
  set_worker_count(1);
  const TimeSeries a = run(s0, cfg, opt);
  set_worker_count(3);
  const TimeSeries b = run(s0, cfg, opt);
  set_worker_count(0);
  CHECK(a.rows == b.rows);
  const auto e = a.values("energy");
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] <= e[i - 1] * (1 + 1e-12));
  CHECK(a.columns[1] == "besov_uw_s0.5_p2_qinf_a000");
  CHECK(a.columns[2] == "besov_uw_s0.5_p2_qinf_d1");
  CHECK(a.shell_records[0].times.size() == a.rows.size());
}

TEST_CASE("continuation monitor") {
  const GridSpec g(32, 2 * kPi);
  const lp::ShellRange range = lp::resolved_shells(g);
  lp::ShellSeries zero{range, {}, {}};
  VectorField u0(g);
  for (double t : {0.0, 0.5, 1.0}) zero.push(t, curl_shell_sup(u0, range));
  CHECK(continuation_monitor(zero, 0.0) == 0.0);

  // steady single mode u = (0, sin(3 x1), 0): curl = (0, 0, 3 cos(3 x1)), sup 3
  VectorField u(g);
  u[1] = spectral::plane_wave(g, {3, 0, 0}, Complex(0, -0.5)) + spectral::plane_wave(g, {-3, 0, 0}, Complex(0, 0.5));
  lp::ShellSeries s{range, {}, {}};
  const auto sh = curl_shell_sup(u, range);
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) s.push(t, sh);
  int active = 0;
  double expected = 0;
  for (double v : sh)
    if (v > 1e-12) {
      ++active;
      expected = std::max(expected, v);
    }
  CHECK(active == 1);
  CHECK(expected == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(continuation_monitor(s, 0.0) == doctest::Approx(1.0 * expected));
  CHECK(continuation_monitor(s, 0.5) == doctest::Approx(0.5 * expected));
  CHECK(continuation_monitor(s, 0.6) == doctest::Approx(0.6 * expected));
}
