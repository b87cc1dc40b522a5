#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "doctest.h"
#include "micropolar/errors.hpp"
#include "micropolar/green.hpp"
#include "micropolar/spectral.hpp"
#include "support.hpp"

using namespace micropolar;
using namespace micropolar::green;
using testing_support::random_field;

namespace {

// Fine-step RK4 on the pair ODE, shifted by the slow decay rate so that the
// integrated quantity stays O(1).
Mat2 rk4_oracle(double rho, double t) {
  const double s = std::sqrt(1 + rho * rho);
  const double shift = rho * rho + 1 - s;
  const Mat2 m = reduced_generator(rho) + shift * Mat2::Identity();
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

Eigen::Matrix3cd cross_matrix(const Vec3& x) {
  Eigen::Matrix3cd k;
  k << 0, -x[2], x[1], x[2], 0, -x[0], -x[1], x[0], 0;
  return k;
}

}  // namespace

TEST_CASE("reduced propagator closed-form limits") {
  for (double t : {0.0, 0.3, 2.0, 50.0}) {
    Mat2 g = reduced_green_eval(0.0, t);
    CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g(1, 1) == doctest::Approx(std::exp(-2 * t)).epsilon(1e-14));
    CHECK(g(0, 1) == 0.0);
  }
  for (double rho : {0.0, 0.5, 7.0, 1e3}) CHECK(reduced_green_eval(rho, 0.0) == Mat2::Identity());
  // huge rho^2 t stays finite
  Mat2 g = reduced_green_eval(1e3, 1.0);
  CHECK(g.allFinite());
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
  CHECK(reduced_green_eval(400.0, 6.25).allFinite());
}

TEST_CASE("reduced propagator against a fine-step integration") {
  {
    const Mat2 want = rk4_oracle(1.0, 1.0);
    const double s = std::sqrt(2.0);
    const Mat2 got = reduced_green_shifted(1.0, 1.0, (2 - s) * 1.0);
    CHECK((got - want).norm() <= 1e-8 * want.norm());
  }
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const double rho = 30 * ur(rng), t = 10 * ur(rng);
    const double s = std::sqrt(1 + rho * rho);
    const Mat2 want = rk4_oracle(rho, t);
    const Mat2 got = reduced_green_shifted(rho, t, (rho * rho + 1 - s) * t);
    CHECK((got - want).norm() <= 1e-8 * want.norm());
    CHECK(got(0, 1) == got(1, 0));
  }
}

TEST_CASE("small-time branch is continuous") {
  const double rho = 0.7, s = std::sqrt(1 + rho * rho);
  const double t0 = 1e-4 / s;
  const Mat2 a = reduced_green_eval(rho, t0 * (1 - 1e-9));
  const Mat2 b = reduced_green_eval(rho, t0 * (1 + 1e-9));
  CHECK((a - b).norm() <= 1e-12);
  // off-diagonal ~ rho t for tiny t
  const Mat2 c = reduced_green_eval(rho, 1e-9);
  CHECK(c(0, 1) == doctest::Approx(rho * 1e-9).epsilon(1e-6));
}

TEST_CASE("semigroup property and contraction") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  double worst_op = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double rho = 30 * ur(rng), t = 5 * ur(rng), s = 5 * ur(rng);
    const Mat2 lhs = reduced_green_eval(rho, t) * reduced_green_eval(rho, s);
    const Mat2 rhs = reduced_green_eval(rho, t + s);
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(rhs.norm(), 1e-300) + 1e-300);
    Eigen::JacobiSVD<Mat2> svd(reduced_green_eval(rho, t));
    worst_op = std::max(worst_op, svd.singularValues()(0));
  }
  CHECK(worst_op <= 1.0 + 1e-12);
}

TEST_CASE("generator eigenvalues") {
  for (int i = 0; i < 100; ++i) {
    const double rho = 0.01 + 0.3 * i;
    Eigen::SelfAdjointEigenSolver<Mat2> es(-reduced_generator(rho));
    const double s = std::sqrt(1 + rho * rho);
    const double lo = (rho * rho * rho * rho + rho * rho) / (rho * rho + 1 + s);  // rho^2 + 1 - s, stable form
    CHECK(es.eigenvalues()(0) == doctest::Approx(lo).epsilon(1e-12));
    CHECK(es.eigenvalues()(1) == doctest::Approx(rho * rho + 1 + s).epsilon(1e-12));
    CHECK(es.eigenvalues()(0) > 0.0);
  }
}

TEST_CASE("phi functions") {
  for (double z : {-40.0, -3.0, -0.6, -0.49, -0.1, -1e-6, 0.0, 0.2}) {
    const double e = std::exp(z);
    if (std::abs(z) > 1e-3) {
      CHECK(phi_function(1, z) == doctest::Approx((e - 1) / z).epsilon(1e-12));
      CHECK(phi_function(2, z) == doctest::Approx((e - 1 - z) / (z * z)).epsilon(1e-9));
    }
  }
  CHECK(phi_function(1, 0.0) == 1.0);
  CHECK(phi_function(2, 0.0) == 0.5);
  CHECK(std::abs(phi_function(2, 0.5 - 1e-12) - phi_function(2, 0.5 + 1e-12)) <= 1e-12);
  for (double rho : {0.0, 0.3, 4.0, 25.0}) {
    for (double h : {1e-3, 0.1, 1.0}) {
      const Mat2 m = h * reduced_generator(rho);
      const Mat2 p0 = reduced_phi(0, rho, h), p1 = reduced_phi(1, rho, h), p2 = reduced_phi(2, rho, h);
      CHECK((m * p1 - (p0 - Mat2::Identity())).norm() <= 1e-12 * (1 + m.norm()));
      CHECK((m * p2 - (p1 - Mat2::Identity())).norm() <= 1e-11 * (1 + m.norm()));
    }
  }
}

TEST_CASE("pade exponential") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 20; ++i) {
    Vec3 xi{3 * nd(rng), 3 * nd(rng), 3 * nd(rng)};
    const double t = std::abs(nd(rng));
    const Mat6 a = full_generator(xi);
    CHECK((a - a.adjoint()).norm() <= 1e-14 * a.norm());
    Eigen::SelfAdjointEigenSolver<Mat6> es(a);
    const Mat6 ref = es.eigenvectors() * (-t * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                     es.eigenvectors().adjoint();
    const Mat6 got = full_green_eval(xi, t);
    CHECK((got - ref).norm() <= 1e-10 * ref.norm());
  }
  CHECK(full_green_eval({1, 2, 3}, 0.0) == Mat6::Identity());
  Mat6 bad = Mat6::Zero();
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(expm_pade13(bad), NumericError);
}

TEST_CASE("full propagator: xi-parallel rotation decays like a damped heat mode") {
  Vec3 xi{0.6, -1.1, 2.0};
  const double r2 = 0.36 + 1.21 + 4.0;
  const double t = 0.37;
  Vec6 v = Vec6::Zero();
  for (int i = 0; i < 3; ++i) v(3 + i) = xi[i] / std::sqrt(r2);
  const Vec6 r = full_green_eval(xi, t) * v;
  CHECK((r - std::exp(-(2 * r2 + 2) * t) * v).norm() <= 1e-12);
}

TEST_CASE("full propagator solves the primitive linear system") {
  // d/dt u = Lap u + curl w, d/dt w = Lap w - 2w + grad div w + curl u
  Vec3 xi{1.0, 0.5, -0.25};
  const Complex I(0, 1);
  Vec6 v;
  v << 0.2, 0.1, 0.3 + 0.1 * I, 0.5, -0.3 * I, 0.1;
  const double h = 1e-6;
  const Vec6 d = (full_green_eval(xi, h) * v - v) / h;
  Eigen::Vector3cd u = v.head<3>(), w = v.tail<3>();
  const double r2 = 1 + 0.25 + 0.0625;
  const Eigen::Vector3cd x(xi[0], xi[1], xi[2]);
  Eigen::Vector3cd du = -r2 * u + I * (cross_matrix(xi) * w);
  Eigen::Vector3cd dw = -(r2 + 2) * w - x * (x.transpose() * w)(0) + I * (cross_matrix(xi) * u);
  CHECK((d.head<3>() - du).norm() <= 1e-5);
  CHECK((d.tail<3>() - dw).norm() <= 1e-5);
}

TEST_CASE("full and reduced propagators agree on solenoidal velocity") {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> nd;
  const Complex I(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d x(nd(rng), nd(rng), nd(rng));
    x *= std::exp(nd(rng));
    const Vec3 xi{x(0), x(1), x(2)};
    const double rho = x.norm();
    const double t = 2 * std::abs(nd(rng));
    Eigen::Vector3cd u(Complex(nd(rng), nd(rng)), Complex(nd(rng), nd(rng)), Complex(nd(rng), nd(rng)));
    u -= x.cast<Complex>() * (x.cast<Complex>().dot(u)) / (rho * rho);
    Eigen::Vector3cd w(Complex(nd(rng), nd(rng)), Complex(nd(rng), nd(rng)), Complex(nd(rng), nd(rng)));
    auto transform_mode = [&](const Eigen::Vector3cd& uu, const Eigen::Vector3cd& ww) {
      const Eigen::Vector3cd c = I * (cross_matrix(xi) * ww) / rho;
      Eigen::Matrix<Complex, 7, 1> out;
      out << uu(2), -uu(1), uu(0), c(2), -c(1), c(0), I * x.cast<Complex>().dot(ww) / rho;
      return out;
    };
    Vec6 v;
    v << u, w;
    const Vec6 r = full_green_eval(xi, t) * v;
    const auto via_full = transform_mode(r.head<3>(), r.tail<3>());
    const auto init = transform_mode(u, w);
    const Mat2 g = reduced_green_eval(rho, t);
    Eigen::Matrix<Complex, 7, 1> via_reduced;
    for (int e = 0; e < 3; ++e) {
      via_reduced(e) = g(0, 0) * init(e) + g(0, 1) * init(3 + e);
      via_reduced(3 + e) = g(1, 0) * init(e) + g(1, 1) * init(3 + e);
    }
    via_reduced(6) = std::exp(-(2 * rho * rho + 2) * t) * init(6);
    CHECK((via_full - via_reduced).norm() <= 1e-8 * std::max(via_reduced.norm(), 1e-300));
  }
}

TEST_CASE("apply_semigroups") {
  GridSpec g(16, 2 * kPi);
  std::mt19937_64 rng(35);
  State s{spectral::leray_project(testing_support::random_vector(g, rng, 5)),
          testing_support::random_vector(g, rng, 5), 0.0};
  TransformedState ts = transform(s);
  TransformedState id = apply_semigroups(ts, 0.0);
  CHECK(transformed_distance(id, ts) == 0.0);
  TransformedState a = apply_semigroups(apply_semigroups(ts, 0.13), 0.29);
  TransformedState b = apply_semigroups(ts, 0.42);
  CHECK(transformed_distance(a, b) <= 1e-11 * ts.u_a.a12.max_abs());
  CHECK(b.t == doctest::Approx(0.42));
  // against the mode-by-mode 6x6 propagator
  TransformedState c = transform(apply_full_green(s, 0.42));
  CHECK(transformed_distance(c, b) <= 1e-10 * ts.u_a.a12.max_abs());
}

TEST_CASE("derivative bound scans") {
  const auto rho = geometric_grid(0.1, 30.0, 40);
  const auto t = geometric_grid(0.01, 10.0, 40);
  for (int order = 0; order <= 2; ++order) {
    BoundScanReport r = scan_derivative_bounds(order, rho, t, 1e3);
    CHECK(r.finite);
    CHECK(r.pass);
    CHECK(r.sup > 0.0);
  }
  // order 1 agrees with the analytic derivative of the closed form at one point
  const double r0 = 2.0, t0 = 0.5, h = 1e-5;
  const Mat2 fd = (reduced_green_eval(r0 + h, t0) - reduced_green_eval(r0 - h, t0)) / (2 * h);
  Mat2 dm;
  dm << -2 * r0, 1, 1, -2 * r0;
  // d/drho exp(tM) = int_0^t exp((t-s)M) dM exp(sM) ds, trapezoid with many nodes
  Mat2 acc = Mat2::Zero();
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const double s = t0 * i / n;
    const double wgt = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += wgt * reduced_green_eval(r0, t0 - s) * dm * reduced_green_eval(r0, s);
  }
  acc *= t0 / n;
  CHECK((fd - acc).norm() <= 1e-6 * acc.norm());
  CHECK_THROWS_AS(scan_derivative_bounds(3, rho, t, 1.0), UnsupportedOrderError);
  CHECK(!scan_derivative_bounds(2, rho, t, 1e3, 1e-9).diagnostics.empty());
}
