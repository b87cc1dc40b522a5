#include "micropolar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "micropolar/errors.hpp"
#include "micropolar/parallel.hpp"

namespace micropolar {

GridSpec::GridSpec(int n, double length, double dealias_fraction)
    : n_(n), length_(length), dealias_fraction_(dealias_fraction) {
  if (n < 16 || (n & (n - 1)) != 0)
    throw DomainError("grid: n must be a power of two >= 16, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length))
    throw DomainError("grid: box length must be positive");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw DomainError("grid: dealias fraction must lie in (0, 1]");
  unit_ = 2.0 * kPi / length;
}

double GridSpec::cell_volume() const noexcept {
  const double h = length_ / n_;
  return h * h * h;
}

std::array<int, 3> GridSpec::wavevector(std::size_t idx) const noexcept {
  const std::size_t nn = static_cast<std::size_t>(n_);
  const int c = static_cast<int>(idx % nn);
  const int b = static_cast<int>((idx / nn) % nn);
  const int a = static_cast<int>(idx / (nn * nn));
  return {wrap(a), wrap(b), wrap(c)};
}

Vec3 GridSpec::xi(std::size_t idx) const noexcept {
  const auto k = wavevector(idx);
  return {unit_ * k[0], unit_ * k[1], unit_ * k[2]};
}

std::size_t GridSpec::conjugate_index(std::size_t idx) const noexcept {
  const auto k = wavevector(idx);
  auto neg = [this](int v) { return slot(v == -n_ / 2 ? v : -v); };
  return index(neg(k[0]), neg(k[1]), neg(k[2]));
}

bool GridSpec::retained(int kx, int ky, int kz) const noexcept {
  const double cut = dealias_cutoff_index();
  return std::abs(kx) <= cut && std::abs(ky) <= cut && std::abs(kz) <= cut;
}

double GridSpec::max_retained_xi2() const noexcept {
  const int kmax = std::min(static_cast<int>(std::floor(dealias_cutoff_index())), n_ / 2);
  const double k = unit_ * kmax;
  return 3.0 * k * k;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b)) throw StructuralError(std::string(where) + ": grid mismatch");
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const GridSpec& grid, bool real)
    : grid_(grid), modes_(grid.size(), Complex(0.0, 0.0)), real_(real) {}

ScalarField::ScalarField(const GridSpec& grid, std::vector<Complex> modes, bool real)
    : grid_(grid), modes_(std::move(modes)), real_(real) {
  if (modes_.size() != grid_.size()) throw StructuralError("ScalarField: coefficient count mismatch");
}

ScalarField ScalarField::from_physical(const GridSpec& grid, std::span<const Complex> samples,
                                       bool real) {
  if (samples.size() != grid.size()) throw StructuralError("from_physical: sample count mismatch");
  std::vector<Complex> buf(samples.begin(), samples.end());
  detail::fft3d_inplace(buf, grid.n(), -1);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : buf) v *= scale;
  return ScalarField(grid, std::move(buf), real);
}

std::vector<Complex> ScalarField::to_physical() const {
  if (real_) {
    const auto r = to_physical_real();
    return std::vector<Complex>(r.begin(), r.end());
  }
  std::vector<Complex> buf(modes_);
  detail::fft3d_inplace(buf, grid_.n(), +1);
  return buf;
}

std::vector<double> ScalarField::to_physical_real() const {
  std::vector<double> out(modes_.size());
  if (real_) {
    detail::fft3d_c2r(modes_, out, grid_.n());
    return out;
  }
  std::vector<Complex> buf(modes_);
  detail::fft3d_inplace(buf, grid_.n(), +1);
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
  return out;
}

ScalarField ScalarField::from_physical_real(const GridSpec& grid, std::span<const double> samples) {
  if (samples.size() != grid.size()) throw StructuralError("from_physical_real: sample count mismatch");
  std::vector<Complex> buf(grid.size());
  detail::fft3d_r2c(samples, buf, grid.n());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : buf) v *= scale;
  return ScalarField(grid, std::move(buf), true);
}

double ScalarField::max_abs() const {
  return deterministic_max(modes_.size(), [&](std::size_t lo, std::size_t hi) {
    double m = 0.0;
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(modes_[i]));
    return m;
  });
}

double ScalarField::reality_defect() const {
  const double scale = max_abs();
  if (scale == 0.0) return 0.0;
  const double worst = deterministic_max(modes_.size(), [&](std::size_t lo, std::size_t hi) {
    double m = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      m = std::max(m, std::abs(modes_[grid_.conjugate_index(i)] - std::conj(modes_[i])));
    return m;
  });
  return worst / scale;
}

void ScalarField::enforce_reality() {
  std::vector<Complex> out(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i)
    out[i] = 0.5 * (modes_[i] + std::conj(modes_[grid_.conjugate_index(i)]));
  modes_ = std::move(out);
  real_ = true;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField::+=");
  for (std::size_t i = 0; i < modes_.size(); ++i) modes_[i] += o.modes_[i];
  real_ = real_ && o.real_;
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField::-=");
  for (std::size_t i = 0; i < modes_.size(); ++i) modes_[i] -= o.modes_[i];
  real_ = real_ && o.real_;
  return *this;
}

ScalarField& ScalarField::operator*=(Complex s) {
  for (auto& v : modes_) v *= s;
  if (s.imag() != 0.0) real_ = false;
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (auto& v : modes_) v *= s;
  return *this;
}

ScalarField& ScalarField::axpy(Complex s, const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField::axpy");
  for (std::size_t i = 0; i < modes_.size(); ++i) modes_[i] += s * o.modes_[i];
  real_ = real_ && o.real_ && s.imag() == 0.0;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(Complex s, ScalarField a) { return a *= s; }

// ---------------------------------------------------------------------------

VectorField::VectorField(ScalarField a, ScalarField b, ScalarField d)
    : c{std::move(a), std::move(b), std::move(d)} {
  require_same_grid(c[0].grid(), c[1].grid(), "VectorField");
  require_same_grid(c[0].grid(), c[2].grid(), "VectorField");
  const bool real = c[0].is_real() && c[1].is_real() && c[2].is_real();
  for (auto& s : c) s.set_real(real);
}

VectorField& VectorField::operator+=(const VectorField& o) {
  for (int i = 0; i < 3; ++i) c[i] += o.c[i];
  return *this;
}
VectorField& VectorField::operator-=(const VectorField& o) {
  for (int i = 0; i < 3; ++i) c[i] -= o.c[i];
  return *this;
}
VectorField& VectorField::operator*=(double s) {
  for (auto& x : c) x *= s;
  return *this;
}
VectorField& VectorField::axpy(Complex s, const VectorField& o) {
  for (int i = 0; i < 3; ++i) c[i].axpy(s, o.c[i]);
  return *this;
}
VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

// ---------------------------------------------------------------------------

AMatrixField::AMatrixField(ScalarField e12, ScalarField e13, ScalarField e23)
    : a12(std::move(e12)), a13(std::move(e13)), a23(std::move(e23)) {
  require_same_grid(a12.grid(), a13.grid(), "AMatrixField");
  require_same_grid(a12.grid(), a23.grid(), "AMatrixField");
  const bool real = a12.is_real() && a13.is_real() && a23.is_real();
  a12.set_real(real);
  a13.set_real(real);
  a23.set_real(real);
}

Complex AMatrixField::at(int i, int j, std::size_t idx) const noexcept {
  if (i == j) return Complex(0.0, 0.0);
  const bool upper = i < j;
  const int lo = upper ? i : j;
  const int hi = upper ? j : i;
  const ScalarField& e = (lo == 0 && hi == 1) ? a12 : (lo == 0 ? a13 : a23);
  return upper ? e[idx] : -e[idx];
}

AMatrixField& AMatrixField::operator+=(const AMatrixField& o) {
  a12 += o.a12;
  a13 += o.a13;
  a23 += o.a23;
  return *this;
}
AMatrixField& AMatrixField::operator-=(const AMatrixField& o) {
  a12 -= o.a12;
  a13 -= o.a13;
  a23 -= o.a23;
  return *this;
}
AMatrixField& AMatrixField::operator*=(double s) {
  a12 *= s;
  a13 *= s;
  a23 *= s;
  return *this;
}
AMatrixField& AMatrixField::axpy(Complex s, const AMatrixField& o) {
  a12.axpy(s, o.a12);
  a13.axpy(s, o.a13);
  a23.axpy(s, o.a23);
  return *this;
}
AMatrixField operator+(AMatrixField a, const AMatrixField& b) { return a += b; }
AMatrixField operator-(AMatrixField a, const AMatrixField& b) { return a -= b; }

}  // namespace micropolar
