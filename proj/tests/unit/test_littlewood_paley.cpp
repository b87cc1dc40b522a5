#include <cmath>
#include <random>

#include "doctest.h"
#include "micropolar/errors.hpp"
#include "micropolar/littlewood_paley.hpp"
#include "micropolar/spectral.hpp"
#include "support.hpp"

using namespace micropolar;
using namespace testing_support;

namespace {

// Random real field whose coefficients live where rho_lo <= |xi| <= rho_hi.
ScalarField radial_band_field(const GridSpec& g, std::mt19937_64& rng, double rho_lo, double rho_hi) {
  std::normal_distribution<double> nd;
  ScalarField f(g, true);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double r = g.unit() * std::sqrt(double(lp::mode_norm2(kx, ky, kz)));
    if (r >= rho_lo && r <= rho_hi && g.retained(kx, ky, kz)) f[idx] = Complex(nd(rng), nd(rng));
  });
  f.enforce_reality();
  return f;
}

}  // namespace

TEST_CASE("bump supports and plateau") {
  for (int i = 0; i <= 4000; ++i) {
    const double r = 4.0 * i / 4000.0;
    if (r >= 4.0 / 3.0) CHECK(lp::chi(r) == 0.0);
    if (r <= 1.0) CHECK(lp::chi(r) == 1.0);
    if (r <= 0.75 || r >= 8.0 / 3.0) CHECK(lp::phi(r) == 0.0);
    if (r >= 4.0 / 3.0 && r <= 2.0) CHECK(lp::phi(r) == 1.0);
    CHECK(lp::phi(r) >= 0.0);
    CHECK(lp::phi(r) <= 1.0);
  }
}

TEST_CASE("resolved shell range") {
  auto r = lp::resolved_shells(GridSpec(128, 32 * kPi));
  CHECK(r.j_min == -3);
  CHECK(r.j_max == 1);
  auto s = lp::resolved_shells(GridSpec(32, 2 * kPi));
  CHECK(s.j_min == 1);
  CHECK(s.j_max == 3);
}

TEST_CASE("partition of unity on resolved lattice") {
  GridSpec g(64, 8 * kPi);
  const auto r = lp::resolved_shells(g);
  const auto& t = lp::shell_table(g);
  double worst = 0.0;
  for_each_mode(g, [&](std::size_t, int kx, int ky, int kz) {
    const long m = lp::mode_norm2(kx, ky, kz);
    const double rho = g.unit() * std::sqrt(double(m));
    if (m == 0 || rho < std::ldexp(0.75, r.j_min) || rho > std::ldexp(4.0 / 3.0, r.j_max)) return;
    double sum = 0.0;
    for (int j = r.j_min - 1; j <= r.j_max + 1; ++j) sum += t.weight(m, j);
    worst = std::max(worst, std::abs(sum - 1.0));
    // table agrees with the direct profile evaluation
    for (int j = r.j_min - 1; j <= r.j_max + 1; ++j)
      CHECK(std::abs(t.weight(m, j) - lp::phi(std::ldexp(rho, -j))) <= 1e-15);
  });
  CHECK(worst <= 1e-8);
}

TEST_CASE("shell projectors") {
  GridSpec g(32, 2 * kPi);
  std::mt19937_64 rng(11);
  ScalarField f = random_field(g, rng, 15);
  const auto all = lp::lattice_shells(g);

  for (int j = all.j_min; j <= all.j_max; ++j)
    for (int k = all.j_min; k <= all.j_max; ++k)
      if (std::abs(j - k) >= 2) CHECK(lp::project_shell(lp::project_shell(f, k), j).max_abs() == 0.0);

  ScalarField sum(g);
  for (int j = all.j_min; j <= all.j_max; ++j) sum += lp::project_shell(f, j);
  CHECK(max_diff(sum, f) <= 1e-12 * f.max_abs());

  for (int j = 1; j <= 3; ++j) {
    ScalarField s(g);
    s[0] = f[0];
    for (int k = all.j_min; k < j; ++k) s += lp::project_shell(f, k);
    CHECK(max_diff(s, lp::project_ball(f, j)) <= 1e-10 * f.max_abs());
  }

  // |xi| = 3 sits where phi(2^-1 r) = 1 (r = 1.5 is inside [4/3, 2])
  ScalarField w = spectral::plane_wave(g, {3, 0, 0}, 1.0);
  CHECK(max_diff(lp::project_shell(w, 1), w) == 0.0);
  CHECK(lp::project_shell(w, 0).max_abs() == 0.0);
}

TEST_CASE("besov norm basics") {
  GridSpec g(32, 2 * kPi);
  std::mt19937_64 rng(12);
  CHECK(lp::besov_norm(ScalarField(g), {0.5, 2, 2}) == 0.0);
  const auto r = lp::resolved_shells(g);
  for (int trial = 0; trial < 100; ++trial) {
    ScalarField f = radial_band_field(g, rng, std::ldexp(4.0 / 3.0, r.j_min), std::ldexp(2.0, r.j_max));
    const double ratio = lp::besov_norm(f, {0.0, 2.0, 2.0}) / spectral::l2_norm(f);
    CHECK(ratio >= 1.0 / std::sqrt(3.0));
    CHECK(ratio <= std::sqrt(3.0));
  }
  // plateau-pure field in shell j = 2
  ScalarField p = radial_band_field(g, rng, 4.0 / 3.0 * 4.0, 2.0 * 4.0);
  CHECK(max_diff(lp::project_shell(p, 2), p) <= 1e-15 * p.max_abs());
  for (double pp : {2.0, 4.0, lp::kInf}) {
    const double b = lp::besov_norm(p, {0.75, pp, lp::kInf});
    const double want = std::exp2(2 * 0.75) * spectral::lp_norm(p, pp);
    CHECK(std::abs(b - want) <= 1e-10 * want);
  }
  // Parseval path agrees with collocation quadrature
  ScalarField q = random_field(g, rng, 10);
  const auto a = lp::shell_norms(q, 2.0, r);
  for (int j = r.j_min; j <= r.j_max; ++j) {
    const double direct = spectral::lp_norm_samples(lp::project_shell(q, j).to_physical(), 2.0, g.cell_volume());
    CHECK(std::abs(a[j - r.j_min] - direct) <= 1e-12 * direct);
  }
  CHECK_THROWS_AS(lp::besov_norm(ScalarField(GridSpec(16, 1.0, 0.2)), {0, 2, 2}), DomainError);
}

TEST_CASE("vector and matrix fields sum their entries") {
  GridSpec g(16, 2 * kPi);
  std::mt19937_64 rng(13);
  VectorField v = random_vector(g, rng, 5);
  const lp::BesovParams bp{0.5, 2, lp::kInf};
  CHECK(lp::besov_norm(v, bp) == doctest::Approx(lp::besov_norm(v[0], bp) + lp::besov_norm(v[1], bp) + lp::besov_norm(v[2], bp)));
  AMatrixField m(v[2], -1.0 * v[1], v[0]);
  CHECK(lp::besov_norm(m, bp) == doctest::Approx(2.0 * lp::besov_norm(v, bp)));
}

TEST_CASE("chemin-lerner norms") {
  GridSpec g(32, 2 * kPi);
  std::mt19937_64 rng(14);
  ScalarField f = random_field(g, rng, 10);
  const lp::BesovParams bp{0.5, 2.0, 2.0};
  const double b = lp::besov_norm(f, bp);
  std::vector<double> times{0.0, 0.5, 1.25, 2.0};
  std::vector<ScalarField> fields(4, f);
  CHECK(std::abs(lp::chemin_lerner_norm(times, fields, lp::kInf, bp) - b) <= 1e-12 * b);
  CHECK(std::abs(lp::chemin_lerner_norm(times, fields, 1.0, bp) - 2.0 * b) <= 1e-10 * b);

  // L^r_t(B) versus the shell-first norm, direct computation of both sides
  std::vector<ScalarField> series;
  for (std::size_t i = 0; i < times.size(); ++i) series.push_back(random_field(g, rng, 10));
  for (double r : {1.0, 2.0}) {
    for (double q : {2.0, lp::kInf}) {
      if (r > q) continue;
      const lp::BesovParams p{0.25, 2.0, q};
      double outer = 0.0;
      for (std::size_t i = 1; i < times.size(); ++i)
        outer += 0.5 * (times[i] - times[i - 1]) *
                 (std::pow(lp::besov_norm(series[i - 1], p), r) + std::pow(lp::besov_norm(series[i], p), r));
      outer = std::pow(outer, 1.0 / r);
      CHECK(lp::chemin_lerner_norm(times, series, r, p) <= outer * (1 + 1e-12));
    }
  }
  std::vector<double> bad{0.0, 1.0, 1.0, 2.0};
  CHECK_THROWS_AS(lp::chemin_lerner_norm(bad, fields, 1.0, bp), DomainError);
}

TEST_CASE("bony decomposition") {
  GridSpec g(32, 2 * kPi);
  std::mt19937_64 rng(15);
  ScalarField f = random_field(g, rng, 5);
  ScalarField h = random_field(g, rng, 5);
  auto parts = lp::bony_decompose(f, h);
  ScalarField total = parts.t_fg + parts.t_gf + parts.r_fg;
  ScalarField prod = spectral::dealiased_product(f, h);
  CHECK(max_diff(total, prod) <= 1e-8 * prod.max_abs());

  ScalarField c(g);
  c[0] = 2.5;
  auto cp = lp::bony_decompose(c, h);
  CHECK(max_diff(cp.t_fg, 2.5 * h) <= 1e-12 * h.max_abs());
  CHECK(cp.t_gf.max_abs() <= 1e-14);
  CHECK(cp.r_fg.max_abs() <= 1e-14);
}

TEST_CASE("bony support arithmetic") {
  GridSpec g(128, kPi);  // unit 2: shells 2 through 6 resolved
  std::mt19937_64 rng(16);
  ScalarField f = lp::project_shell(radial_band_field(g, rng, 4.0, 11.0), 2);
  ScalarField h = lp::project_shell(radial_band_field(g, rng, 64.0, 85.0), 6);
  auto parts = lp::bony_decompose(f, h);
  const double scale = spectral::dealiased_product(f, h).max_abs();
  CHECK(parts.r_fg.max_abs() <= 1e-12 * scale);
  CHECK(parts.t_gf.max_abs() <= 1e-12 * scale);
}
