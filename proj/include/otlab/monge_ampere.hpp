#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "otlab/cf_determinant.hpp"
#include "otlab/gaussian.hpp"
#include "otlab/report.hpp"
#include "otlab/transport.hpp"
#include "otlab/types.hpp"

namespace otlab {

struct SolverOptions {
  GridSpec grid;
  QuadratureOptions quad;
};

// Monotone transport map pushing the standard Gaussian to the target density.
// Quadratic (and linear/constant) potentials are solved in closed form;
// separable and one-dimensional targets are tabulated coordinatewise via the
// inverse-distribution construction; anything else is out of reach here and
// throws UnsolvableRegime.
TransportSolution solve_transport(const LogConcaveDensity& density,
                                  const SolverOptions& opts = {});

// One-dimensional inverse-distribution solve for the target
// exp(-f(t) - log_c) against the Gaussian weight.  Map values are
// root-solved per grid node from the tabulated log-CDF (left tail) or
// log-survival (right tail); derivatives are the exact density ratio.
Monotone1D solve_monotone_1d(const std::function<double(double)>& f,
                             double log_c, const SolverOptions& opts = {});

// Two sides of the Monge-Ampere equation in the log domain:
//   f(Tx) + log c = log det2(I + hess phi) - L phi - |grad phi|^2 / 2,
// where L is the Ornstein-Uhlenbeck operator <x, grad phi> - tr hess phi.
double log_ma_lhs(const LogConcaveDensity& density,
                  const TransportSolution& sol, const VectorXd& x);
double log_ma_rhs(const TransportSolution& sol, const VectorXd& x);

double default_ma_tolerance(const TransportSolution& sol);

struct MAReport {
  double max_relative_residual = 0.0;
  double mean_relative_residual = 0.0;
  double tolerance = 0.0;
  Report report;
};

// Pointwise relative residual |expm1(rhs - lhs)| over the batch.
MAReport ma_residual(const LogConcaveDensity& density,
                     const TransportSolution& sol, const SampleBatch& batch,
                     double tol);

// Subsolution side of the equation: L(Tx) * Lambda(x) <= 1 pointwise, hence
// E[g(Tx) Lambda(x)] <= E[g] for nonnegative g.
Report subsolution_check(const LogConcaveDensity& density,
                         const TransportSolution& sol,
                         const SampleBatch& batch, double tol);

// Wasserstein decomposition
//   |T - id|^2_2 / 2 = E[L log L] + E[log det2(I + hess phi)]
// with the Talagrand inequality d^2 <= 2 E[L log L] as corollaries of the
// nonpositive det2 term.  Closed form for quadratic data, coordinatewise
// quadrature for tabulated maps, Monte Carlo otherwise.
Report wasserstein_identity(const LogConcaveDensity& density,
                            const TransportSolution& sol,
                            const SampleBatch& batch);

// Displacement interpolation T_t = (1-t) id + t T: the interpolant density
// satisfies sup L_t <= (e^alpha / c)^t.  Probed in the log domain over the
// batch; inapplicable when no finite lower bound on f was declared.
Report interpolation_bound(const LogConcaveDensity& density,
                           const TransportSolution& sol,
                           const SampleBatch& batch,
                           const std::vector<double>& ts = {0.25, 0.5, 0.75});

// Contraction gate: for H-convex targets the map is 1-Lipschitz and the
// potential gradient is too.  Constants are always reported; they are only
// asserted when the convexity hypothesis holds, so counterexamples surface
// as out-of-range metrics rather than broken preconditions.
Report lipschitz_check(const LogConcaveDensity& density,
                       const TransportSolution& sol, const SampleBatch& batch);

// Cyclic monotonicity of the graph of T over random cycles from the batch.
Report cyclic_monotonicity_check(const TransportSolution& sol,
                                 const SampleBatch& batch, int cycles,
                                 std::uint64_t seed);

// Vector field with an exact Jacobian evaluator.
struct VectorField {
  int dim = 0;
  std::function<VectorXd(const VectorXd&)> value;
  std::function<MatrixXd(const VectorXd&)> jacobian;
};

VectorField linear_field(MatrixXd M);

// Gaussian divergence delta xi = <xi(x), x> - tr grad xi(x).
double gaussian_divergence(const VectorField& xi, const VectorXd& x);

// Composition rule under a shift M = I + u:
//   (delta xi)(Mx) = delta(xi o M)(x) + <xi(Mx), u(x)> + tr(grad xi(Mx) grad u(x)).
Report divergence_composition_check(const VectorField& xi,
                                    const VectorField& u,
                                    const SampleBatch& batch);

}  // namespace otlab
