#pragma once

#include <cstdint>

#include "otlab/cf_determinant.hpp"
#include "otlab/gaussian.hpp"
#include "otlab/report.hpp"
#include "otlab/transport.hpp"
#include "otlab/types.hpp"

namespace otlab {

// Left polar factorization of the shift I+K: I+K = (I+Kbar)(I+A) with
// I+Kbar symmetric positive semidefinite and I+A orthogonal, so
// A + A^T + A^T A = 0.
struct PolarFactors {
  MatrixXd Kbar;
  MatrixXd A;

  MatrixXd stretch() const;   // I + Kbar
  MatrixXd rotation() const;  // I + A
};

// Throws SingularPerturbation when I+K is numerically singular (the rotation
// factor is not determined there).
PolarFactors polar_factorize(const MatrixXd& K);

// Degree-two Girsanov density of the shift U = I+K:
//   Lambda_K(x) = det2(I+K) * exp(-(<Kx,x> - tr K) - |Kx|^2 / 2).
// For invertible U it satisfies E[g(Ux) |Lambda_K(x)|] = E[g(x)] and the
// pointwise inversion L(Ux) |Lambda_K(x)| = 1, where L is the density of
// mu o U^{-1} against mu.
double log_abs_jacobian_lambda(const MatrixXd& K, const VectorXd& x);
double jacobian_lambda(const MatrixXd& K, const VectorXd& x);

// Pointwise inversion identity, in-mean change of variables, and the
// closed-form relative entropy tr K + |K|_F^2 / 2 - log|det(I+K)| of the
// pushforward.
Report girsanov_density_check(const MatrixXd& K, const SampleBatch& batch);

// Structural identities of the factorization: reconstruction, orthogonality
// of the rotation, the quadratic relation on A, and positive definiteness of
// the stretch.
Report polar_consistency_check(const MatrixXd& K);

// The rotation factor solves the orthogonal Procrustes problem:
// E|Ux - Ox|^2 = |(I+K) - O|_F^2 over orthogonal O is minimal at O = I+A.
// Compares against `trials` Haar-random rotations and a Monte Carlo estimate
// of the displacement energy.
Report minimal_rotation_check(const MatrixXd& K, const SampleBatch& batch,
                              int trials, std::uint64_t seed);

// Kantorovitch potentials of the symmetric factor: phi generates the forward
// map x -> (I+Kbar)x, psi the inverse shift, as quadratic functionals with
// centered second-chaos constants.
struct PolarPotentials {
  Functional phi;
  Functional psi;
};
PolarPotentials polar_potentials(const MatrixXd& Kbar);

// Theta = (I+Kbar)^{-1} is a right inverse of the stretch; the Jacobian
// density of the inverse shift integrates to one; the potential gradients
// satisfy grad psi(Tx) = -grad phi(x).
Report right_inverse_check(const MatrixXd& Kbar, const SampleBatch& batch);

// Symmetric/antisymmetric split of a linear field x -> Kx.  Only the
// symmetric half carries a potential; the antisymmetric half has vanishing
// second chaos.  Also checks the second-chaos moments E = 0, Var = 2|K|_F^2.
Report helmholtz_split_check(const MatrixXd& K, const SampleBatch& batch);

// Centered Gaussian target N(0, Q), Q positive definite.
struct GaussianTarget {
  MatrixXd Q;
  MatrixXd sqrt_Q;

  static GaussianTarget make(MatrixXd Q);
  int dim() const { return static_cast<int>(Q.rows()); }
};

// Monotone shift T(x) = Q^{1/2} x pushing the standard Gaussian to N(0, Q).
TransportSolution gaussian_target_map(const GaussianTarget& target);

// Characteristic-function test of the pushforward:
// E[exp(i <a, Tx>)] = exp(-<Qa, a>/2) at `probes` random frequencies.
Report characteristic_function_check(const GaussianTarget& target,
                                     const TransportSolution& map,
                                     const SampleBatch& batch, int probes,
                                     std::uint64_t seed);

// Componentwise Monte Carlo recovery of the covariance shift
// M = Q - I = E[grad phi grad phi^T + 2 hess phi].
struct MomentRecovery {
  MatrixXd M;
  MatrixXd se;
};
MomentRecovery recover_covariance_shift(const TransportSolution& sol,
                                        const SampleBatch& batch);

Report moment_recovery_check(const GaussianTarget& target,
                             const TransportSolution& sol,
                             const SampleBatch& batch);

}  // namespace otlab
