#include "otlab/quadrature.hpp"

#include <cmath>

#include "otlab/rng.hpp"

namespace otlab {

namespace {

// Kronrod 15-point nodes and weights with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
  double kronrod;
  double err;
};

PanelResult gk15(const std::function<double(double)>& g, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = g(c);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double f1 = g(c - x);
    const double f2 = g(c + x);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  return {resk * h, std::abs((resk - resg) * h)};
}

double integrate_rec(const std::function<double(double)>& g, double a, double b,
                     double tol, int depth, const QuadratureOptions& opts) {
  const PanelResult r = gk15(g, a, b);
  if (!std::isfinite(r.kronrod)) {
    throw QuadratureFailure("integrate: non-finite panel value");
  }
  if (r.err <= tol || r.err <= opts.rel_tol * std::abs(r.kronrod)) {
    return r.kronrod;
  }
  if (depth >= opts.max_depth) {
    throw QuadratureFailure("integrate: adaptive subdivision did not converge");
  }
  const double m = 0.5 * (a + b);
  return integrate_rec(g, a, m, 0.5 * tol, depth + 1, opts) +
         integrate_rec(g, m, b, 0.5 * tol, depth + 1, opts);
}

}  // namespace

double integrate(const std::function<double(double)>& g, double a, double b,
                 const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  return integrate_rec(g, a, b, opts.abs_tol, 0, opts);
}

double gaussian_expectation(const std::function<double(double)>& g, double range,
                            const QuadratureOptions& opts) {
  return integrate([&](double x) { return g(x) * standard_normal_pdf(x); }, -range,
                   range, opts);
}

HermiteRule gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  MatrixXd J = MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = std::sqrt(0.5 * k);
    J(k, k - 1) = beta;
    J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
  HermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(order);
  const double mu0 = std::sqrt(M_PI);  // integral of exp(-x^2)
  for (int k = 0; k < order; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v0 * v0;
  }
  return rule;
}

double gauss_hermite_expectation(const std::function<double(double)>& g, int order) {
  const HermiteRule rule = gauss_hermite(order);
  const double inv_sqrt_pi = 0.5641895835477562869;
  double acc = 0.0;
  for (int k = 0; k < order; ++k) {
    acc += rule.weights[k] * g(M_SQRT2 * rule.nodes[k]);
  }
  return acc * inv_sqrt_pi;
}

}  // namespace otlab
