#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "micropolar/errors.hpp"

namespace micropolar::detail {
namespace {

enum class Kind { C2C_FORWARD, C2C_BACKWARD, R2C, C2R };

// FFTW_ESTIMATE keeps plan selection independent of timing noise, so repeated
// runs produce bitwise-identical coefficients.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, Kind kind) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find({n, kind});
    if (it != plans_.end()) return it->second;
    const std::size_t total = static_cast<std::size_t>(n) * n * n;
    auto* cbuf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    auto* rbuf = static_cast<double*>(fftw_malloc(sizeof(double) * total));
    if (cbuf == nullptr || rbuf == nullptr) throw NumericError("fftw_malloc failed");
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = nullptr;
    switch (kind) {
      case Kind::C2C_FORWARD: p = fftw_plan_dft_3d(n, n, n, cbuf, cbuf, FFTW_FORWARD, flags); break;
      case Kind::C2C_BACKWARD: p = fftw_plan_dft_3d(n, n, n, cbuf, cbuf, FFTW_BACKWARD, flags); break;
      case Kind::R2C: p = fftw_plan_dft_r2c_3d(n, n, n, rbuf, cbuf, flags); break;
      case Kind::C2R: p = fftw_plan_dft_c2r_3d(n, n, n, cbuf, rbuf, flags); break;
    }
    fftw_free(cbuf);
    fftw_free(rbuf);
    if (p == nullptr) throw NumericError("FFTW planning failed");
    plans_.emplace(std::make_pair(n, kind), p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, Kind>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

std::size_t cube(int n) { return static_cast<std::size_t>(n) * n * n; }

}  // namespace

void fft3d_inplace(std::span<std::complex<double>> data, int n, int sign) {
  if (data.size() != cube(n)) throw StructuralError("fft3d_inplace: size mismatch");
  fftw_plan p = cache().get(n, sign < 0 ? Kind::C2C_FORWARD : Kind::C2C_BACKWARD);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(p, ptr, ptr);
}

void fft3d_c2r(std::span<const std::complex<double>> spectrum, std::span<double> out, int n) {
  if (spectrum.size() != cube(n) || out.size() != cube(n)) throw StructuralError("fft3d_c2r: size mismatch");
  const std::size_t h = static_cast<std::size_t>(n / 2 + 1);
  const std::size_t rows = static_cast<std::size_t>(n) * n;
  std::vector<std::complex<double>> half(rows * h);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < h; ++c) half[r * h + c] = spectrum[r * n + c];
  fftw_plan p = cache().get(n, Kind::C2R);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(half.data()), out.data());
}

void fft3d_r2c_half(std::span<const double> in, std::span<std::complex<double>> half, int n) {
  const std::size_t h = static_cast<std::size_t>(n / 2 + 1);
  if (in.size() != cube(n) || half.size() != static_cast<std::size_t>(n) * n * h)
    throw StructuralError("fft3d_r2c_half: size mismatch");
  fftw_plan p = cache().get(n, Kind::R2C);
  // FFTW never writes through the input of an out-of-place r2c transform.
  fftw_execute_dft_r2c(p, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(half.data()));
}

void expand_half_spectrum(std::span<const std::complex<double>> half, std::span<std::complex<double>> spectrum,
                          int n) {
  const std::size_t h = static_cast<std::size_t>(n / 2 + 1);
  const std::size_t un = static_cast<std::size_t>(n);
  if (spectrum.size() != cube(n) || half.size() != un * un * h)
    throw StructuralError("expand_half_spectrum: size mismatch");
  for (std::size_t a = 0; a < un; ++a) {
    const std::size_t ma = (un - a) % un;
    for (std::size_t b = 0; b < un; ++b) {
      const std::size_t mb = (un - b) % un;
      std::complex<double>* row = spectrum.data() + (a * un + b) * un;
      const std::complex<double>* src = half.data() + (a * un + b) * h;
      const std::complex<double>* mirror = half.data() + (ma * un + mb) * h;
      for (std::size_t c = 0; c < h; ++c) row[c] = src[c];
      for (std::size_t c = h; c < un; ++c) row[c] = std::conj(mirror[un - c]);
    }
  }
}

void fft3d_r2c(std::span<const double> in, std::span<std::complex<double>> spectrum, int n) {
  if (spectrum.size() != cube(n) || in.size() != cube(n)) throw StructuralError("fft3d_r2c: size mismatch");
  const std::size_t h = static_cast<std::size_t>(n / 2 + 1);
  std::vector<std::complex<double>> half(static_cast<std::size_t>(n) * n * h);
  fft3d_r2c_half(in, half, n);
  expand_half_spectrum(half, spectrum, n);
}

}  // namespace micropolar::detail
