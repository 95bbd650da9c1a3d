#pragma once

#include <cstdint>
#include <vector>

#include "otlab/gaussian.hpp"
#include "otlab/monge_ampere.hpp"
#include "otlab/report.hpp"
#include "otlab/transport.hpp"
#include "otlab/types.hpp"

namespace otlab {

// Partition of [0, 1].
struct TimeGrid {
  VectorXd times;  // size steps+1, strictly increasing, 0 to 1

  static TimeGrid uniform(int steps);

  int steps() const { return static_cast<int>(times.size()) - 1; }
  double dt(int i) const { return times(i + 1) - times(i); }
  VectorXd sqrt_dts() const;
};

// Brownian increments, one path per row.  Entry (p, j) depends only on
// (seed, p, j).
struct PathBatch {
  TimeGrid grid;
  MatrixXd increments;
  std::uint64_t seed = 0;

  int paths() const { return static_cast<int>(increments.rows()); }
  int steps() const { return static_cast<int>(increments.cols()); }
};

PathBatch sample_paths(const TimeGrid& grid, int paths, std::uint64_t seed);

// Normalized increments z_j = dW_j / sqrt(dt_j): iid standard Gaussian, the
// orthonormal coordinates every solver below works in.
MatrixXd to_z(const PathBatch& batch);

// Path values at the grid nodes (paths x steps+1, first column zero).
MatrixXd cumulative(const TimeGrid& grid, const MatrixXd& increments);

// Terminal-value functionals expressed in z coordinates.
Functional terminal_linear_z(const TimeGrid& grid, double a);     // a W_1
Functional terminal_quadratic_z(const TimeGrid& grid, double s);  // s W_1^2 / 2

// Transport on path space: the z coordinates carry a standard Gaussian, the
// target density exp(-f)/c, and the monotone map between them.
struct PathTarget {
  TimeGrid grid;
  LogConcaveDensity density;
  TransportSolution map;
};

PathTarget solve_path_transport(const TimeGrid& grid, const Functional& f_z,
                                double alpha, const SolverOptions& opts = {});

// Increments of the transported paths (rows of T(z) scaled back by sqrt dt).
MatrixXd transported_increments(const PathTarget& target,
                                const PathBatch& batch);

// Drift of the target law: u(t_k, path) = -E_target[D_t f | F_t], closed by
// Gaussian conditioning for quadratic-in-z functionals.  At interior nodes
// this is the conditional mean of the next normalized increment over its
// step width; at t = 1 it is the gradient in the final increment.
class GaussianDriftModel {
 public:
  static GaussianDriftModel make(const TimeGrid& grid, const Functional& f_z);

  // u at node k given the first k z coordinates of the path.
  double at(int k, const VectorXd& z_prefix) const;
  int steps() const { return static_cast<int>(b_.size()) - 1; }

 private:
  std::vector<VectorXd> a_;
  VectorXd b_;
  VectorXd scale_;
};

// u along each path at every node (paths x steps+1).
MatrixXd drift_along(const GaussianDriftModel& model, const TimeGrid& grid,
                     const MatrixXd& increments);

// Importance-sampling estimate of the drift for general functionals:
// future increments are drawn from the flat Wiener measure and reweighted by
// exp(-f).  Throws DegenerateWeights when the effective sample size drops
// below kMinEffectiveSamples.
inline constexpr double kMinEffectiveSamples = 50.0;
double mc_drift(const Functional& f_z, const TimeGrid& grid, int node,
                const VectorXd& z_prefix, int samples, std::uint64_t seed);

// Remove the cumulated drift (trapezoid in time) from the path increments.
MatrixXd extract_brownian_part(const TimeGrid& grid, const MatrixXd& increments,
                               const MatrixXd& drift);

// Per-step mean and variance plus pooled lag-1 correlation of the candidate
// Brownian increments, as z-scores against the exact Gaussian values.
Report brownianity_check(const TimeGrid& grid, const MatrixXd& increments);

// Girsanov reconstruction of the density along transported paths:
//   log L = sum_i u(t_{i-1}) dX_i - trapz(u^2)/2   vs   -f(X) - log c.
// The stochastic integral is left-point by construction; the Lebesgue
// integrals use the trapezoid rule.  The signed mean relative error measures
// the O(dt) discretization bias.
Report ito_jacobian_check(const PathTarget& target,
                          const GaussianDriftModel& model,
                          const PathBatch& batch, double bias_tol);

// Law-level factorization checks: composing the monotone map with a
// target-preserving rotation still produces the target (two-sample KS on
// every coordinate), the monotone map has minimal displacement among those
// compositions, and the map inverts exactly.
Report path_rotation_check(const PathTarget& target, const PathBatch& batch,
                           int trials, std::uint64_t seed);

// Free energy -log c as the Gibbs functional E_target[f] + relative entropy:
// path form with the drift energy, and the det2 form along the map.
Report free_energy_check(const PathTarget& target,
                         const GaussianDriftModel& model,
                         const PathBatch& batch);

}  // namespace otlab
