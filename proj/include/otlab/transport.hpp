#pragma once

#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "otlab/gaussian.hpp"
#include "otlab/quadrature.hpp"
#include "otlab/types.hpp"

namespace otlab {

struct GridSpec {
  int points = 4096;
  double range = kGaussianRange;
};

enum class NormalizationMethod {
  ClosedFormQuadratic,
  Quadrature,
  SeparableQuadrature,
  GaussHermite,
  MonteCarlo,
};

const char* to_string(NormalizationMethod m);

// Reference measure exp(-f(x)) dmu / c against the standard Gaussian mu,
// where c = E[exp(-f)] is fixed at construction.  Audits record whether the
// declared hypotheses (f H-convex, f >= -alpha) actually hold; violations are
// flagged, not fatal, so counterexample instances can still be driven through
// the checks.
class LogConcaveDensity {
 public:
  static LogConcaveDensity make(Functional f, double alpha);
  static LogConcaveDensity make_mc(Functional f, double alpha, int count,
                                   std::uint64_t seed);
  static LogConcaveDensity make_gauss_hermite(Functional f, double alpha, int order);

  const Functional& f() const { return f_; }
  int dim() const { return f_.dim(); }
  double alpha() const { return alpha_; }
  double c() const { return c_; }
  double log_c() const { return log_c_; }
  NormalizationMethod method() const { return method_; }

  bool h_convex() const { return h_convex_; }
  bool lower_bound_ok() const { return lower_bound_ok_; }
  double min_hessian_eigenvalue() const { return min_hessian_eig_; }

  // Radon-Nikodym density L(x) = exp(-f(x)) / c and its log.
  double density(const VectorXd& x) const;
  double log_density(const VectorXd& x) const;

 private:
  LogConcaveDensity() = default;
  void audit();

  Functional f_ = Functional::constant(1, 0.0);
  double alpha_ = 0.0;
  double c_ = 1.0;
  double log_c_ = 0.0;
  NormalizationMethod method_ = NormalizationMethod::Quadrature;
  bool h_convex_ = true;
  bool lower_bound_ok_ = true;
  double min_hessian_eig_ = 0.0;
};

// Monotone increasing scalar map tabulated on a uniform grid.  T is pinned by
// the table (cubic Hermite pieces with exact slopes); T' is recomputed
// analytically as the density ratio pdf(x) / target_pdf(T(x)); the potential
// is the antiderivative of T(x) - x anchored at phi(0) = 0.
class Monotone1D {
 public:
  Monotone1D(VectorXd xs, VectorXd Ts, VectorXd dTs,
             std::function<double(double)> target_log_pdf);

  double map(double x) const;
  double deriv(double x) const;  // density ratio, exact given the map value
  double inverse(double y) const;
  double phi(double x) const;

  const VectorXd& grid() const { return xs_; }
  const VectorXd& values() const { return Ts_; }
  const VectorXd& derivs() const { return dTs_; }

 private:
  int cell_of(double x) const;
  double eval_cell(int i, double x) const;
  double integral_cell(int i, double x) const;  // int_{xs_i}^{x} T(s) ds

  VectorXd xs_, Ts_, dTs_, phis_;
  std::function<double(double)> target_log_pdf_;
  double h_ = 0.0;
  double phi0_ = 0.0;
};

// Optimal transport map from the standard Gaussian, represented either in
// closed form (quadratic potential) or per coordinate.
class TransportSolution {
 public:
  struct QuadraticPotential {
    MatrixXd N;      // symmetric, eigenvalues > -1
    VectorXd shift;  // T(x) = (I+N)x + shift
  };

  struct Affine1D {
    double slope = 1.0;  // > 0
    double intercept = 0.0;
  };

  using Coord = std::variant<Affine1D, Monotone1D>;

  static TransportSolution quadratic(MatrixXd N, VectorXd shift);
  static TransportSolution monotone1d(Monotone1D m);
  static TransportSolution composite(std::vector<Coord> coords);

  int dim() const;
  bool closed_form() const;  // no tabulated coordinate

  VectorXd map(const VectorXd& x) const;
  VectorXd inverse(const VectorXd& y) const;
  double phi(const VectorXd& x) const;  // anchored at phi(0) = 0
  VectorXd grad_phi(const VectorXd& x) const;
  MatrixXd hessian_phi(const VectorXd& x) const;
  double ou_phi(const VectorXd& x) const;  // <x, grad phi> - trace hess phi

  const QuadraticPotential* as_quadratic() const;
  const std::vector<Coord>* as_coords() const;  // composite or single 1-D

 private:
  std::variant<QuadraticPotential, std::vector<Coord>> repr_;
  std::shared_ptr<const Eigen::PartialPivLU<MatrixXd>> lu_;  // inverse of I+N
};

}  // namespace otlab
