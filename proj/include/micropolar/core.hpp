#pragma once

#include "micropolar/grid.hpp"

namespace micropolar {

/// Viscosity coefficients of the full system. The transformed formulation and
/// the exact semigroups exist only for the defaults.
struct PhysicalParams {
  double chi = 0.5;
  double nu = 0.5;
  double kappa = 1.0;
  double mu = 1.0;

  /// Throws DomainError for negative coefficients, chi + nu = 0 or mu = 0.
  void validate() const;
  bool is_default() const noexcept {
    return chi == 0.5 && nu == 0.5 && kappa == 1.0 && mu == 1.0;
  }
};

struct State {
  VectorField u;
  VectorField omega;
  double t = 0.0;
};

/// (u_A, omega_Omega, omega_d): velocity as an antisymmetric matrix, and the
/// micro-rotation split into its curl and divergence parts. The split cannot
/// see the spatial mean of omega, which on the torus is carried alongside.
struct TransformedState {
  AMatrixField u_a;
  AMatrixField omega_omega;
  ScalarField omega_d;
  double t = 0.0;
  std::array<Complex, 3> omega_mean{};
};

/// u_A with (1,2) = u3, (1,3) = -u2, (2,3) = u1.
AMatrixField to_antisymmetric(const VectorField& u);
/// Inverse of to_antisymmetric.
VectorField from_antisymmetric(const AMatrixField& m);

/// Matrix curl with entry (i, j) = d_i z^j - d_j z^i, so that it coincides
/// with (curl z)_A.
AMatrixField curl_matrix(const VectorField& z);
/// Row-wise divergence (div M)_i = sum_j d_j M_ij.
VectorField matrix_divergence(const AMatrixField& m);

struct OmegaSplit {
  ScalarField omega_d;
  AMatrixField omega_omega;
};

/// omega_d = Lambda^-1 div omega, omega_Omega = Lambda^-1 curl_matrix(omega).
/// Both parts carry no zero mode.
OmegaSplit decompose_omega(const VectorField& omega);
/// omega = -Lambda^-1 grad omega_d + Lambda^-1 div omega_Omega (zero mode dropped).
VectorField reconstruct_omega(const ScalarField& omega_d, const AMatrixField& omega_omega);

TransformedState transform(const State& s);
State reconstruct(const TransformedState& ts);

struct Tendency {
  VectorField du;
  VectorField domega;
};

struct TransformedTendency {
  AMatrixField du_a;
  AMatrixField domega_omega;
  ScalarField domega_d;
};

/// Nonlinear transport terms P(u . grad u) and u . grad omega, dealiased
/// unless `dealias` is false.
struct Convection {
  VectorField u_grad_u;      ///< already Leray-projected
  VectorField u_grad_omega;
};
Convection convection(const State& s, bool dealias = true);

/// Tendencies of the Leray-projected system with general coefficients.
Tendency rhs_projected(const State& s, const PhysicalParams& params, bool nonlinear = true,
                       bool dealias = true);

/// Tendencies of the transformed system at the default coefficients. `s`
/// supplies the primitive fields for the transport terms and must match `ts`
/// (ConsistencyError otherwise).
TransformedTendency rhs_transformed(const TransformedState& ts, const State& s, bool nonlinear = true);

/// Transport contributions alone, in transformed variables:
/// -(P(u.grad u))_A, -Lambda^-1 curl_matrix(u.grad omega), -Lambda^-1 div(u.grad omega).
TransformedTendency transformed_forcing(const Convection& c);

/// Linear change of variables applied to a pair of tendencies.
TransformedTendency transform_tendency(const Tendency& d);

/// 0.5 (||u||^2 + ||omega||^2).
double energy(const State& s);

/// Largest coefficient difference between two transformed states.
double transformed_distance(const TransformedState& a, const TransformedState& b);

}  // namespace micropolar
