#include <cmath>
#include <random>

#include "doctest.h"
#include "micropolar/errors.hpp"
#include "micropolar/spectral.hpp"
#include "support.hpp"

using namespace micropolar;
using namespace testing_support;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec(12, 1.0), DomainError);
  CHECK_THROWS_AS(GridSpec(8, 1.0), DomainError);
  CHECK_THROWS_AS(GridSpec(16, -1.0), DomainError);
  CHECK_THROWS_AS(GridSpec(16, 1.0, 0.0), DomainError);
  GridSpec g(16, 2 * kPi);
  CHECK(g.wrap(7) == 7);
  CHECK(g.wrap(8) == -8);
  CHECK(g.wrap(15) == -1);
  CHECK(g.conjugate_index(g.index(1, 2, 3)) == g.index(15, 14, 13));
}

TEST_CASE("dealias mask keeps exactly |k_i| <= frac n/2") {
  GridSpec g(32, 2 * kPi);
  std::mt19937_64 rng(1);
  ScalarField f = random_field(g, rng, 15);
  ScalarField d = spectral::dealias(f);
  const double cut = 2.0 / 3.0 * 32 / 2;
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const bool keep = std::abs(kx) <= cut && std::abs(ky) <= cut && std::abs(kz) <= cut;
    if (keep) CHECK(d[idx] == f[idx]);
    else CHECK(d[idx] == Complex(0.0, 0.0));
  });
}

TEST_CASE("transform round trip and Parseval") {
  GridSpec g(32, 3.0);
  std::mt19937_64 rng(2);
  ScalarField f = random_field(g, rng, 15, false);
  const auto phys = f.to_physical();
  ScalarField back = ScalarField::from_physical(g, phys, true);
  CHECK(max_diff(f, back) <= 1e-13 * f.max_abs());
  CHECK(f.reality_defect() <= 1e-12);
  double s = 0.0;
  for (const auto& v : phys) s += std::norm(v);
  const double spatial = std::sqrt(s * g.cell_volume());
  CHECK(std::abs(spatial - spectral::l2_norm(f)) <= 1e-12 * spatial);
  CHECK(std::abs(spectral::lp_norm(f, 2.0) - spatial) <= 1e-12 * spatial);
}

TEST_CASE("derivative of a plane wave") {
  GridSpec g(16, 2 * kPi);
  ScalarField f = spectral::plane_wave(g, {1, 0, 0}, 1.0);
  ScalarField d = spectral::derivative(f, {1, 0, 0});
  CHECK(max_diff(d, Complex(0, 1) * f) <= 1e-15);
  ScalarField c(g);
  c[0] = 3.0;
  CHECK(spectral::derivative(c, {0, 2, 1}).max_abs() == 0.0);
  CHECK_THROWS_AS(spectral::derivative(f, {3, 1, 1}), UnsupportedOrderError);
}

TEST_CASE("mixed derivative matches closed-form differentiation") {
  GridSpec g(32, 2 * kPi);
  const auto samples = sample(g, [](double x, double y, double) { return Complex(std::sin(2 * x) * std::cos(y), 0); });
  ScalarField f = ScalarField::from_physical(g, samples, true);
  const auto got = spectral::derivative(f, {1, 1, 0}).to_physical();
  const auto want = sample(g, [](double x, double y, double) { return Complex(-2 * std::cos(2 * x) * std::sin(y), 0); });
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    err = std::max(err, std::abs(got[i] - want[i]));
    scale = std::max(scale, std::abs(want[i]));
  }
  CHECK(err <= 1e-12 * scale);
}

TEST_CASE("lambda_power") {
  GridSpec g(16, 2 * kPi);
  std::mt19937_64 rng(3);
  ScalarField f = random_field(g, rng, 5, false);
  CHECK(max_diff(spectral::lambda_power(f, 0.0), f) == 0.0);
  ScalarField r = spectral::lambda_power(spectral::lambda_power(f, 1.0), -1.0);
  ScalarField expect = f;
  expect[0] = 0.0;
  CHECK(max_diff(r, expect) <= 1e-14 * f.max_abs());
  ScalarField w = spectral::plane_wave(g, {2, 0, 0}, 1.0);
  CHECK(std::abs(spectral::lambda_power(w, 0.5)[g.index(2, 0, 0)] - std::sqrt(2.0)) <= 1e-15);
  CHECK_THROWS_AS(spectral::lambda_power(f, 2.5), DomainError);
  // multipliers commute
  ScalarField a = spectral::derivative(spectral::lambda_power(f, 0.7), {1, 0, 2});
  ScalarField b = spectral::lambda_power(spectral::derivative(f, {1, 0, 2}), 0.7);
  CHECK(max_diff(a, b) <= 1e-13 * a.max_abs());
}

TEST_CASE("leray projection") {
  GridSpec g(16, 5.0);
  std::mt19937_64 rng(4);
  ScalarField phi = random_field(g, rng, 7);
  VectorField grad = spectral::gradient(phi);
  CHECK(max_abs(spectral::leray_project(grad)) <= 1e-13 * max_abs(grad));

  VectorField v = random_vector(g, rng, 7);
  VectorField pv = spectral::leray_project(v);
  // brute-force per-mode divergence
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.xi(i);
    worst = std::max(worst, std::abs(x[0] * pv[0][i] + x[1] * pv[1][i] + x[2] * pv[2][i]));
  }
  CHECK(worst / spectral::l2_norm(v) <= 1e-12);
  CHECK(max_diff(spectral::leray_project(pv), pv) <= 1e-14 * max_abs(pv));
  CHECK(max_diff(spectral::leray_project(spectral::curl(v)), spectral::curl(v)) <= 1e-14 * max_abs(spectral::curl(v)));
  CHECK(spectral::divergence_residual(pv) <= 1e-14);

  for (int trial = 0; trial < 100; ++trial) {
    VectorField w = random_vector(g, rng, 3);
    CHECK(spectral::l2_norm(spectral::leray_project(w)) <= spectral::l2_norm(w) * (1 + 1e-15));
  }
}

TEST_CASE("dealiased product") {
  GridSpec g(32, 2 * kPi);
  ScalarField f = spectral::plane_wave(g, {1, 0, 0}, Complex(2, 1));
  ScalarField h = spectral::plane_wave(g, {2, 0, 0}, Complex(0, 3));
  ScalarField p = spectral::dealiased_product(f, h);
  CHECK(std::abs(p[g.index(3, 0, 0)] - Complex(2, 1) * Complex(0, 3)) <= 1e-14);
  CHECK(std::abs(p[g.index(3, 0, 0)]) - p.max_abs() == doctest::Approx(0.0));

  std::mt19937_64 rng(5);
  ScalarField a = random_field(g, rng, 5, false);
  ScalarField one(g);
  one[0] = 1.0;
  CHECK(max_diff(spectral::dealiased_product(a, one), a) <= 1e-14 * a.max_abs());

  // padded-grid oracle: product on a 2x zero-padded grid, then truncated
  ScalarField b = random_field(g, rng, 5, false);
  const auto pa = spectral::to_physical_refined(a, 2);
  const auto pb = spectral::to_physical_refined(b, 2);
  GridSpec fine(64, g.length());
  std::vector<Complex> prod(pa.size());
  for (std::size_t i = 0; i < pa.size(); ++i) prod[i] = pa[i] * pb[i];
  ScalarField fp = ScalarField::from_physical(fine, prod, true);
  ScalarField oracle(g);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    if (g.retained(kx, ky, kz)) oracle[idx] = fp[fine.index(fine.slot(kx), fine.slot(ky), fine.slot(kz))];
  });
  ScalarField got = spectral::dealiased_product(a, b);
  CHECK(max_diff(got, oracle) <= 1e-12 * oracle.max_abs());
}

TEST_CASE("grid mismatch is structural") {
  GridSpec g(16, 1.0), h(16, 2.0);
  CHECK_THROWS_AS(spectral::dealiased_product(ScalarField(g), ScalarField(h)), StructuralError);
}

TEST_CASE("refined sampling reproduces the native lattice") {
  GridSpec g(16, 1.0);
  std::mt19937_64 rng(6);
  ScalarField f = random_field(g, rng, 7);
  const auto coarse = f.to_physical();
  const auto fine = spectral::to_physical_refined(f, 2);
  double err = 0.0;
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b)
      for (int c = 0; c < 16; ++c)
        err = std::max(err, std::abs(coarse[g.index(a, b, c)] - fine[(static_cast<std::size_t>(2 * a) * 32 + 2 * b) * 32 + 2 * c]));
  CHECK(err <= 1e-13);
  CHECK(spectral::lp_norm(f, 4.0, 2) > 0.0);
}
