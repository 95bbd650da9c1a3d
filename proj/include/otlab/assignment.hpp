#pragma once

#include <cstdint>
#include <vector>

#include "otlab/report.hpp"
#include "otlab/types.hpp"

namespace otlab {

// Exact minimum-cost perfect matching on a dense square cost matrix
// (Hungarian algorithm with potentials, O(n^3)).  The dual variables give an
// optimality certificate: u_i + v_j <= c_ij with equality on the matching.
struct AssignmentResult {
  std::vector<int> row_to_col;
  double cost = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

AssignmentResult min_cost_assignment(const MatrixXd& cost);

// Discrete optimal transport between equally sized point clouds under the
// squared Euclidean cost.  Rows are points.  Guarded to 2000 points; beyond
// that the cubic solve stops being a usable oracle and throws
// OracleInfeasible.
struct DiscreteOtPlan {
  std::vector<int> source_to_target;
  double total_cost = 0.0;
  AssignmentResult assignment;
};

DiscreteOtPlan discrete_ot_oracle(const MatrixXd& X, const MatrixXd& Y);

inline constexpr int kOracleMaxPoints = 2000;

// Factor the empirical map x_i -> y_i through the optimal assignment sigma:
// T(x_j) = y_{sigma(j)} is the optimal rearrangement and
// R(x_i) = x_{sigma^{-1}(i)} permutes the source points, so T o R reproduces
// the original pairing while R preserves the empirical measure exactly.
struct MapFactorization {
  std::vector<int> sigma;
  std::vector<int> rearrangement;  // i -> sigma^{-1}(i)
  double transport_cost = 0.0;
  double original_cost = 0.0;
  AssignmentResult assignment;
};

MapFactorization factorize_general_map(const MatrixXd& X, const MatrixXd& Y);

// Certificate-level verification of the factorization: dual feasibility,
// complementary slackness, bijectivity of R, exact reconstruction, and cost
// domination against random permutations.
Report factorization_check(const MatrixXd& X, const MatrixXd& Y, int trials,
                           std::uint64_t seed);

}  // namespace otlab
