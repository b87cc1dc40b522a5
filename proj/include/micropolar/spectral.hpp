#pragma once

#include <vector>

#include "micropolar/grid.hpp"

/// Fourier-multiplier calculus on the periodic box. Every operation is pure:
/// inputs are read-only and the result is a fresh field.
namespace micropolar::spectral {

inline constexpr int kMaxDerivativeOrder = 4;

/// (i xi)^alpha f. Throws UnsupportedOrderError when |alpha| > 4.
ScalarField derivative(const ScalarField& f, const MultiIndex& alpha);

/// |xi|^s f with s in [-2, 2]; the zero mode is annihilated whenever s != 0.
ScalarField lambda_power(const ScalarField& f, double s);

/// v - xi (xi . v) / |xi|^2 per mode; the zero mode passes through.
VectorField leray_project(const VectorField& v);

/// Pointwise product by collocation followed by the dealias mask.
ScalarField dealiased_product(const ScalarField& f, const ScalarField& g);

/// Zeroes every mode with some |k_i| above the dealias cutoff.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& v);

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
/// Vector curl, nabla x v.
VectorField curl(const VectorField& v);

/// max_k |xi . v(k)| / max_k |xi| |v(k)|; zero for the zero field.
double divergence_residual(const VectorField& v);

/// Spatial L2 norm via Parseval: (L^3 sum |f_k|^2)^(1/2).
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);

/// Samples of the trigonometric interpolant on a grid refined by an integer
/// factor (zero padding). factor = 1 is the native collocation grid.
std::vector<Complex> to_physical_refined(const ScalarField& f, int factor);

/// Collocation L^p norm (cell volume * sum |f|^p)^(1/p), max for p = inf,
/// evaluated on the native grid refined by `oversample`.
double lp_norm(const ScalarField& f, double p, int oversample = 1);

/// Same quadrature on precomputed samples with the given cell volume.
double lp_norm_samples(std::span<const Complex> samples, double p, double cell_volume);

/// Single Fourier mode amplitude * exp(i xi_k . x).
ScalarField plane_wave(const GridSpec& grid, const std::array<int, 3>& k, Complex amplitude);

}  // namespace micropolar::spectral
