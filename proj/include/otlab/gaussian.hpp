#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "otlab/rng.hpp"
#include "otlab/statistics.hpp"
#include "otlab/types.hpp"

namespace otlab {

struct GaussianSpace {
  int dim = 0;
};

// One coordinate of a separable functional, with exact derivatives.
struct ScalarFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> ddf;
};

// Scalar functional on R^n with gradient and Hessian access.  The quadratic
// variant stores f(x) = 0.5*<Sx,x> + <h,x> + c with S kept exactly symmetric.
class Functional {
 public:
  enum class Kind { Constant, Linear, Quadratic, Separable, Custom };

  struct QuadraticData {
    MatrixXd S;
    VectorXd h;
    double c = 0.0;
  };

  static Functional constant(int dim, double c);
  static Functional linear(VectorXd h, double c = 0.0);
  static Functional quadratic(MatrixXd S, VectorXd h, double c = 0.0);
  static Functional separable(std::vector<ScalarFunction> parts);
  static Functional custom(int dim, std::function<double(const VectorXd&)> f,
                           std::function<VectorXd(const VectorXd&)> grad,
                           std::function<MatrixXd(const VectorXd&)> hess = nullptr);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  double value(const VectorXd& x) const;
  VectorXd gradient(const VectorXd& x) const;
  MatrixXd hessian(const VectorXd& x) const;

  // Number d of leading coordinates the functional actually depends on.
  int depends_on_first() const { return depends_on_first_; }
  Functional& with_depends_on_first(int d);

  std::optional<double> convexity_lower_bound() const;
  Functional& with_convexity_lower_bound(double b);

  // True when the Hessian comes from central finite differences of the
  // gradient rather than an exact evaluator.
  bool uses_fd_hessian() const;

  const QuadraticData& quadratic_data() const;
  const std::vector<ScalarFunction>& separable_parts() const;

  // Max relative deviation between the declared gradient and a central
  // finite-difference probe at `count` Gaussian points.
  double audit_gradient(int count, std::uint64_t seed, double step = 1e-5) const;

 private:
  struct CustomData {
    std::function<double(const VectorXd&)> f;
    std::function<VectorXd(const VectorXd&)> grad;
    std::function<MatrixXd(const VectorXd&)> hess;
  };

  Kind kind_ = Kind::Constant;
  int dim_ = 0;
  int depends_on_first_ = 0;
  double constant_ = 0.0;
  VectorXd h_;
  QuadraticData quad_;
  std::vector<ScalarFunction> parts_;
  CustomData custom_;
  std::optional<double> convexity_bound_;
};

// Batch of standard Gaussian sample points (rows).  Entry (i, j) depends only
// on (seed, i, j), never on the traversal order.
struct SampleBatch {
  MatrixXd points;
  std::uint64_t seed = 0;

  int count() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

inline constexpr std::uint64_t kStreamBatch = 0x5AB0;

SampleBatch sample(const GaussianSpace& space, int count, std::uint64_t seed);

// Divergence of the linear vector field x -> Kx.
template <typename DK, typename DX>
VectorXd divergence_linear(const Eigen::MatrixBase<DK>& K, const Eigen::MatrixBase<DX>& x) {
  if (K.rows() != K.cols() || K.cols() != x.size()) {
    throw DimensionMismatch("divergence_linear: K and x dimensions disagree");
  }
  return K * x;
}

// Second-order divergence of K: <Kx, x> - trace K (a centered second chaos).
template <typename DK, typename DX>
double second_chaos(const Eigen::MatrixBase<DK>& K, const Eigen::MatrixBase<DX>& x) {
  if (K.rows() != K.cols() || K.cols() != x.size()) {
    throw DimensionMismatch("second_chaos: K and x dimensions disagree");
  }
  return x.dot(K * x) - K.trace();
}

// Number operator applied to f: <x, grad f(x)> - trace(hess f(x)).
double ou_operator(const Functional& f, const VectorXd& x);

struct ConvexityReport {
  double min_eigenvalue = 0.0;
  bool exact = false;    // true when computed from constant Hessian data
  bool one_convex = false;  // hess f >= -I (within tol)
  bool h_convex = false;    // hess f >= 0  (within tol)
  double tol = 0.0;
};

ConvexityReport check_one_convex(const Functional& f, const SampleBatch& batch,
                                 double tol = 1e-9);

McEstimate mc_expect(const std::function<double(const VectorXd&)>& g,
                     const SampleBatch& batch);

}  // namespace otlab
