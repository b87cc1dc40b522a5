#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace micropolar {

using Complex = std::complex<double>;
using MultiIndex = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Periodic box [0, L)^3 sampled by n points per axis.
///
/// Mode (a, b, c) in storage order carries the integer wavevector
/// k = (wrap(a), wrap(b), wrap(c)) with wrap(i) = i for i < n/2 and i - n
/// otherwise, so every component lies in [-n/2, n/2). The physical
/// wavevector is xi = (2 pi / L) k.
class GridSpec {
 public:
  GridSpec() = default;
  /// Throws DomainError unless n >= 16 is a power of two, L > 0 and the
  /// dealias fraction lies in (0, 1].
  GridSpec(int n, double length, double dealias_fraction = 2.0 / 3.0);

  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double dealias_fraction() const noexcept { return dealias_fraction_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_ * n_; }

  /// 2 pi / L.
  double unit() const noexcept { return unit_; }
  double volume() const noexcept { return length_ * length_ * length_; }
  double cell_volume() const noexcept;

  int wrap(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }
  /// Storage slot of wrapped index k in [-n/2, n/2).
  int slot(int k) const noexcept { return k < 0 ? k + n_ : k; }
  std::size_t index(int a, int b, int c) const noexcept {
    return (static_cast<std::size_t>(a) * n_ + b) * n_ + c;
  }
  std::array<int, 3> wavevector(std::size_t idx) const noexcept;
  Vec3 xi(std::size_t idx) const noexcept;
  /// Storage index of -k.
  std::size_t conjugate_index(std::size_t idx) const noexcept;

  /// Largest retained |k_i| under the dealias rule.
  double dealias_cutoff_index() const noexcept { return dealias_fraction_ * n_ / 2.0; }
  /// Physical radius of the retained cube's inscribed ball.
  double dealias_cutoff() const noexcept { return unit_ * dealias_cutoff_index(); }
  bool retained(int kx, int ky, int kz) const noexcept;
  /// Largest |xi|^2 among retained modes.
  double max_retained_xi2() const noexcept;

  bool operator==(const GridSpec& o) const noexcept {
    return n_ == o.n_ && length_ == o.length_ && dealias_fraction_ == o.dealias_fraction_;
  }

 private:
  int n_ = 0;
  double length_ = 0.0;
  double dealias_fraction_ = 2.0 / 3.0;
  double unit_ = 0.0;
};

/// Throws StructuralError when the grids differ.
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

/// Complex Fourier coefficients of a scalar field:
/// f(x) = sum_k modes[k] exp(i xi_k . x).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridSpec& grid, bool real = true);
  ScalarField(const GridSpec& grid, std::vector<Complex> modes, bool real);

  /// Coefficients of the trigonometric interpolant of the given samples
  /// (row-major over the (x1, x2, x3) lattice with spacing L/n).
  static ScalarField from_physical(const GridSpec& grid, std::span<const Complex> samples,
                                   bool real);
  std::vector<Complex> to_physical() const;

  /// Real samples; for real fields this uses a half-size transform, otherwise
  /// it is the real part of to_physical().
  std::vector<double> to_physical_real() const;
  /// Coefficients of real samples; the result is exactly conjugate symmetric.
  static ScalarField from_physical_real(const GridSpec& grid, std::span<const double> samples);

  const GridSpec& grid() const noexcept { return grid_; }
  bool is_real() const noexcept { return real_; }
  void set_real(bool real) noexcept { real_ = real; }

  std::span<Complex> modes() noexcept { return modes_; }
  std::span<const Complex> modes() const noexcept { return modes_; }
  Complex& operator[](std::size_t i) noexcept { return modes_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return modes_[i]; }
  std::size_t size() const noexcept { return modes_.size(); }

  /// max_k |f(-k) - conj f(k)| / max_k |f(k)|; zero for the zero field.
  double reality_defect() const;
  /// Copies f(k) into the conjugate partner f(-k) by averaging, and sets the flag.
  void enforce_reality();
  /// max_k |f(k)|.
  double max_abs() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(Complex s);
  ScalarField& operator*=(double s);
  /// this += s * o.
  ScalarField& axpy(Complex s, const ScalarField& o);

 private:
  GridSpec grid_;
  std::vector<Complex> modes_;
  bool real_ = true;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(Complex s, ScalarField a);

struct VectorField {
  std::array<ScalarField, 3> c;

  VectorField() = default;
  explicit VectorField(const GridSpec& grid, bool real = true)
      : c{ScalarField(grid, real), ScalarField(grid, real), ScalarField(grid, real)} {}
  VectorField(ScalarField a, ScalarField b, ScalarField d);

  const GridSpec& grid() const noexcept { return c[0].grid(); }
  bool is_real() const noexcept { return c[0].is_real(); }
  ScalarField& operator[](int i) noexcept { return c[i]; }
  const ScalarField& operator[](int i) const noexcept { return c[i]; }

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  VectorField& axpy(Complex s, const VectorField& o);
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Antisymmetric 3x3 matrix field stored by its upper-triangular entries.
/// Entry (i, j) with i > j is -(j, i); the diagonal is zero.
struct AMatrixField {
  ScalarField a12, a13, a23;

  AMatrixField() = default;
  explicit AMatrixField(const GridSpec& grid, bool real = true)
      : a12(grid, real), a13(grid, real), a23(grid, real) {}
  AMatrixField(ScalarField e12, ScalarField e13, ScalarField e23);

  const GridSpec& grid() const noexcept { return a12.grid(); }
  bool is_real() const noexcept { return a12.is_real(); }
  /// Independent entries in the order (1,2), (1,3), (2,3).
  ScalarField& entry(int e) noexcept { return e == 0 ? a12 : (e == 1 ? a13 : a23); }
  const ScalarField& entry(int e) const noexcept { return e == 0 ? a12 : (e == 1 ? a13 : a23); }
  /// Full matrix coefficient at mode idx; rows/columns 0-based.
  Complex at(int i, int j, std::size_t idx) const noexcept;

  AMatrixField& operator+=(const AMatrixField& o);
  AMatrixField& operator-=(const AMatrixField& o);
  AMatrixField& operator*=(double s);
  AMatrixField& axpy(Complex s, const AMatrixField& o);
};

AMatrixField operator+(AMatrixField a, const AMatrixField& b);
AMatrixField operator-(AMatrixField a, const AMatrixField& b);

/// Calls fn(idx, kx, ky, kz) for every mode in storage order.
template <typename Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
  const int n = g.n();
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a) {
    const int kx = g.wrap(a);
    for (int b = 0; b < n; ++b) {
      const int ky = g.wrap(b);
      for (int c = 0; c < n; ++c, ++idx) fn(idx, kx, ky, g.wrap(c));
    }
  }
}

}  // namespace micropolar
