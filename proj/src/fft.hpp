#pragma once

#include <complex>
#include <span>

namespace micropolar::detail {

/// In-place unnormalized 3-D DFT of an n^3 row-major array.
/// sign = -1 is the forward (analysis) transform, +1 the inverse.
void fft3d_inplace(std::span<std::complex<double>> data, int n, int sign);

/// Unnormalized inverse DFT of a conjugate-symmetric spectrum stored in full
/// (n^3, FFT-native order) into n^3 real samples. Only the half k3 >= 0
/// (slots 0..n/2) is read.
void fft3d_c2r(std::span<const std::complex<double>> spectrum, std::span<double> out, int n);

/// Unnormalized forward DFT of n^3 real samples; the full spectrum is written,
/// the upper half by conjugate symmetry.
void fft3d_r2c(std::span<const double> in, std::span<std::complex<double>> spectrum, int n);

/// Unnormalized forward DFT of n^3 real samples into the r2c half spectrum,
/// n * n * (n/2 + 1) coefficients with k3 in 0..n/2.
void fft3d_r2c_half(std::span<const double> in, std::span<std::complex<double>> half, int n);

/// Full FFT-native spectrum from a half spectrum by conjugate symmetry.
void expand_half_spectrum(std::span<const std::complex<double>> half, std::span<std::complex<double>> spectrum,
                          int n);

}  // namespace micropolar::detail
