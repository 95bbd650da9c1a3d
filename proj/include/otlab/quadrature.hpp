#pragma once

#include <functional>

#include "otlab/types.hpp"

namespace otlab {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_depth = 48;
};

// Adaptive Gauss-Kronrod 15(7) integration of g over [a, b].
double integrate(const std::function<double(double)>& g, double a, double b,
                 const QuadratureOptions& opts = {});

// Integration range such that the standard Gaussian tail mass outside
// [-R, R] is far below every tolerance used here (tail at 8 is ~6e-16).
inline constexpr double kGaussianRange = 8.0;

// E[g(Z)], Z ~ N(0,1), by adaptive quadrature over [-R, R].
double gaussian_expectation(const std::function<double(double)>& g,
                            double range = kGaussianRange,
                            const QuadratureOptions& opts = {});

// Gauss-Hermite rule (physicists' weight exp(-x^2)), computed by
// Golub-Welsch from the Jacobi matrix.
struct HermiteRule {
  VectorXd nodes;
  VectorXd weights;
};

HermiteRule gauss_hermite(int order);

// E[g(Z)] via a fixed-order Gauss-Hermite rule.
double gauss_hermite_expectation(const std::function<double(double)>& g, int order);

}  // namespace otlab
