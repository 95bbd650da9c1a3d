#pragma once

#include <cstdint>
#include <vector>

#include "otlab/gaussian.hpp"
#include "otlab/monge_ampere.hpp"
#include "otlab/report.hpp"
#include "otlab/transport.hpp"
#include "otlab/types.hpp"

namespace otlab {

// Sigma budget for the dimension-lift monotonicity checks.
inline constexpr double kLiftSigmas = 2.0;

struct LiftOptions {
  int gh_order = 64;
  int mc_count = 20000;
  std::uint64_t mc_seed = 0x11F7;
};

// Integrate the trailing dim-n coordinates of exp(-f) against the Gaussian:
//   f_n(x) = -log E_z[exp(-f(x, z))].
// Quadratic data closes via the Schur complement of I+S22; separable data
// drops to a constant shift; otherwise tensor Gauss-Hermite (up to three
// integrated coordinates) or a fixed-seed Monte Carlo inner loop.
Functional condition_functional(const Functional& f, int n,
                                const LiftOptions& opts = {});

// Conditioned target as a normalized density.  The total mass is preserved
// (tower property), H-convexity and the lower bound alpha carry over.
LogConcaveDensity condition_density(const LogConcaveDensity& density, int n,
                                    const LiftOptions& opts = {});

// E[exp(-f_n)] = E[exp(-f)] for every n.
Report tower_property_check(const LogConcaveDensity& density,
                            const std::vector<int>& ns,
                            const LiftOptions& opts = {});

struct ConvergenceStudy {
  std::vector<int> dims;
  std::vector<double> errors;  // e_n = E |grad phi_n - grad phi|^2
  std::vector<double> ses;
  Report report;
};

// Potential-gradient approximation error against the full solve, checked to
// be non-increasing in n (within kLiftSigmas standard errors) and exactly
// zero at n = dim.
ConvergenceStudy convergence_study(const LogConcaveDensity& density,
                                   const std::vector<int>& ns,
                                   const SampleBatch& batch,
                                   const SolverOptions& sopts = {},
                                   const LiftOptions& lopts = {});

// E|hess phi_n|_HS^2 and E tr((I+hess phi_n)^{-1} (hess phi_n)^2) stay below
// their full-dimensional values along the chain.
Report hessian_bound_study(const LogConcaveDensity& density,
                           const std::vector<int>& ns,
                           const SampleBatch& batch,
                           const SolverOptions& sopts = {},
                           const LiftOptions& lopts = {});

// f(x) + f(y) on the doubled space.
Functional product_double(const Functional& f);

// Entropy, squared distance, and the Talagrand slack all double on product
// targets.
Report talagrand_doubling_check(const LogConcaveDensity& density,
                                const SampleBatch& batch,
                                const SolverOptions& sopts = {});

// E[exp(t |grad phi|^2)]: finite iff 2 t max eig(N)^2 < 1 for quadratic
// potentials (closed form checked against Monte Carlo); tabulated maps use
// the grid slope bound for the criterion.
Report exp_integrability_check(const TransportSolution& sol,
                               const SampleBatch& batch, double t = 0.1);

}  // namespace otlab
