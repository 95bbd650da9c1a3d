#pragma once

#include "otlab/types.hpp"

namespace otlab {

// Hilbert-Schmidt perturbation of the identity.  When the symmetric flag is
// set the stored matrix is the symmetrized input, exactly.
struct HSPerturbation {
  MatrixXd K;
  bool symmetric = false;

  static HSPerturbation general(MatrixXd K);
  static HSPerturbation make_symmetric(MatrixXd K);

  int dim() const { return static_cast<int>(K.rows()); }
};

// det(I+K) * exp(-trace K).  Symmetric inputs go through the eigenvalue
// product; general ones through an LU factorization with sign tracking.
// Both paths accumulate in the log domain.
double det2(const HSPerturbation& P);

// log det2(I+K).  Requires I+K positive definite on the symmetric path
// (every eigenvalue of K above -1) and det(I+K) > 0 on the general path;
// otherwise throws SingularPerturbation.
double log_det2(const HSPerturbation& P);

// log |det2(I+K)| together with the sign of det(I+K).  Throws
// SingularPerturbation only when I+K is numerically singular.
struct SignedLogDet {
  double log_abs;
  double sign;
};
SignedLogDet log_abs_det2(const HSPerturbation& P);

// Eigenvalue tolerance below which I+K is treated as singular.
inline constexpr double kSingularEigenTol = 1e-12;

// Scalar helper: log((1+a) * exp(-a)) for a > -1.
double log_det2_scalar(double a);

}  // namespace otlab
