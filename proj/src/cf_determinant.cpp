#include "otlab/cf_determinant.hpp"

#include <cmath>

namespace otlab {

HSPerturbation HSPerturbation::general(MatrixXd K) {
  if (K.rows() != K.cols()) {
    throw DimensionMismatch("HSPerturbation: matrix must be square");
  }
  return HSPerturbation{std::move(K), false};
}

HSPerturbation HSPerturbation::make_symmetric(MatrixXd K) {
  if (K.rows() != K.cols()) {
    throw DimensionMismatch("HSPerturbation: matrix must be square");
  }
  MatrixXd sym = 0.5 * (K + K.transpose());
  return HSPerturbation{std::move(sym), true};
}

double log_det2_scalar(double a) {
  if (a <= -1.0 + kSingularEigenTol) {
    throw SingularPerturbation("log_det2: eigenvalue at or below -1");
  }
  return std::log1p(a) - a;
}

double det2(const HSPerturbation& P) {
  const int n = P.dim();
  if (n == 0) return 1.0;
  if (P.symmetric) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(P.K);
    double log_abs = 0.0;
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      const double one_plus = 1.0 + es.eigenvalues()[i];
      if (one_plus == 0.0) return 0.0;
      if (one_plus < 0.0) sign = -sign;
      log_abs += std::log(std::abs(one_plus)) - es.eigenvalues()[i];
    }
    return sign * std::exp(log_abs);
  }
  const MatrixXd A = MatrixXd::Identity(n, n) + P.K;
  Eigen::PartialPivLU<MatrixXd> lu(A);
  double log_abs = -P.K.trace();
  double sign = lu.permutationP().determinant() > 0 ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    const double u = lu.matrixLU()(i, i);
    if (u == 0.0) return 0.0;
    if (u < 0.0) sign = -sign;
    log_abs += std::log(std::abs(u));
  }
  return sign * std::exp(log_abs);
}

SignedLogDet log_abs_det2(const HSPerturbation& P) {
  const int n = P.dim();
  if (n == 0) return {0.0, 1.0};
  if (P.symmetric) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(P.K);
    double log_abs = 0.0;
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      const double one_plus = 1.0 + es.eigenvalues()[i];
      if (std::abs(one_plus) <= kSingularEigenTol) {
        throw SingularPerturbation("log_abs_det2: I+K numerically singular");
      }
      if (one_plus < 0.0) sign = -sign;
      log_abs += std::log(std::abs(one_plus)) - es.eigenvalues()[i];
    }
    return {log_abs, sign};
  }
  const MatrixXd A = MatrixXd::Identity(n, n) + P.K;
  Eigen::PartialPivLU<MatrixXd> lu(A);
  double log_abs = -P.K.trace();
  double sign = lu.permutationP().determinant() > 0 ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    const double u = lu.matrixLU()(i, i);
    if (std::abs(u) <= kSingularEigenTol) {
      throw SingularPerturbation("log_abs_det2: I+K numerically singular");
    }
    if (u < 0.0) sign = -sign;
    log_abs += std::log(std::abs(u));
  }
  return {log_abs, sign};
}

double log_det2(const HSPerturbation& P) {
  const int n = P.dim();
  if (n == 0) return 0.0;
  if (P.symmetric) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(P.K);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += log_det2_scalar(es.eigenvalues()[i]);
    return acc;
  }
  const MatrixXd A = MatrixXd::Identity(n, n) + P.K;
  Eigen::PartialPivLU<MatrixXd> lu(A);
  double log_abs = 0.0;
  double sign = lu.permutationP().determinant() > 0 ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    const double u = lu.matrixLU()(i, i);
    if (std::abs(u) <= kSingularEigenTol) {
      throw SingularPerturbation("log_det2: I+K numerically singular");
    }
    if (u < 0.0) sign = -sign;
    log_abs += std::log(std::abs(u));
  }
  if (sign < 0.0) {
    throw SingularPerturbation("log_det2: det(I+K) is negative");
  }
  return log_abs - P.K.trace();
}

}  // namespace otlab
