#include "otlab/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otlab/rng.hpp"

namespace otlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kStreamShuffle = 0x5F1E;

double pair_cost(const MatrixXd& X, const MatrixXd& Y, int i, int j) {
  return (X.row(i) - Y.row(j)).squaredNorm();
}

}  // namespace

AssignmentResult min_cost_assignment(const MatrixXd& cost) {
  if (cost.rows() != cost.cols()) {
    throw DimensionMismatch("min_cost_assignment: cost matrix must be square");
  }
  const int n = static_cast<int>(cost.rows());
  AssignmentResult out;
  out.row_to_col.assign(n, -1);
  out.u.assign(n, 0.0);
  out.v.assign(n, 0.0);
  if (n == 0) return out;

  // Hungarian algorithm with potentials; index 0 is the artificial column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= n; ++j) out.row_to_col[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) {
    out.u[i] = u[i + 1];
    out.cost += cost(i, out.row_to_col[i]);
  }
  for (int j = 0; j < n; ++j) out.v[j] = v[j + 1];
  return out;
}

DiscreteOtPlan discrete_ot_oracle(const MatrixXd& X, const MatrixXd& Y) {
  if (X.cols() != Y.cols()) {
    throw DimensionMismatch("discrete_ot_oracle: point dimensions differ");
  }
  if (X.rows() != Y.rows()) {
    throw OracleInfeasible("discrete_ot_oracle: clouds must have equal size");
  }
  const int n = static_cast<int>(X.rows());
  if (n > kOracleMaxPoints) {
    throw OracleInfeasible("discrete_ot_oracle: more than 2000 points");
  }
  MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = pair_cost(X, Y, i, j);
  }
  DiscreteOtPlan plan;
  plan.assignment = min_cost_assignment(cost);
  plan.source_to_target = plan.assignment.row_to_col;
  plan.total_cost = 0.0;
  for (int i = 0; i < n; ++i) {
    plan.total_cost += pair_cost(X, Y, i, plan.source_to_target[i]);
  }
  return plan;
}

MapFactorization factorize_general_map(const MatrixXd& X, const MatrixXd& Y) {
  DiscreteOtPlan plan = discrete_ot_oracle(X, Y);
  const int n = static_cast<int>(X.rows());
  MapFactorization out;
  out.sigma = plan.source_to_target;
  out.rearrangement.assign(n, -1);
  for (int i = 0; i < n; ++i) out.rearrangement[out.sigma[i]] = i;
  out.transport_cost = plan.total_cost;
  out.original_cost = 0.0;
  for (int i = 0; i < n; ++i) out.original_cost += pair_cost(X, Y, i, i);
  out.assignment = std::move(plan.assignment);
  return out;
}

Report factorization_check(const MatrixXd& X, const MatrixXd& Y, int trials,
                           std::uint64_t seed) {
  const MapFactorization fac = factorize_general_map(X, Y);
  const int n = static_cast<int>(X.rows());
  Report rep("map_factorization");

  std::vector<char> seen(n, 0);
  bool bijective = true;
  for (int i = 0; i < n; ++i) {
    if (fac.rearrangement[i] < 0 || seen[fac.rearrangement[i]]) {
      bijective = false;
      break;
    }
    seen[fac.rearrangement[i]] = 1;
  }
  rep.add_flag("rearrangement_bijective", bijective);

  // T(R(x_i)) pairs index i with y_i exactly.
  bool reconstructs = true;
  for (int i = 0; i < n; ++i) {
    if (fac.sigma[fac.rearrangement[i]] != i) {
      reconstructs = false;
      break;
    }
  }
  rep.add_flag("factorization_reconstructs_map", reconstructs);

  // Exact optimality certificate from the duals.
  double worst_slack = 0.0;
  double worst_cs = 0.0;
  double scale = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double c = pair_cost(X, Y, i, j);
      scale = std::max(scale, std::abs(c));
      worst_slack = std::max(
          worst_slack, fac.assignment.u[i] + fac.assignment.v[j] - c);
    }
    const double cm = pair_cost(X, Y, i, fac.sigma[i]);
    worst_cs = std::max(worst_cs, std::abs(fac.assignment.u[i] +
                                           fac.assignment.v[fac.sigma[i]] -
                                           cm));
  }
  rep.add_le("dual_feasibility", worst_slack, 0.0, 1e-9 * scale,
             "closed-form");
  rep.add_le("complementary_slackness", worst_cs, 0.0, 1e-9 * scale,
             "closed-form");
  rep.add_le("optimal_cost_vs_identity", fac.transport_cost,
             fac.original_cost, 1e-9 * scale, "closed-form");

  CounterRng rng(seed);
  std::uint64_t draw = 0;
  double best_random = kInf;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int k = static_cast<int>(rng.bits(kStreamShuffle, draw++) %
                                     static_cast<std::uint64_t>(i + 1));
      std::swap(perm[i], perm[k]);
    }
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += pair_cost(X, Y, i, perm[i]);
    best_random = std::min(best_random, c);
  }
  if (trials > 0) {
    rep.add_le("optimal_cost_vs_random", fac.transport_cost, best_random,
               1e-9 * scale, "mc");
    rep.metric("best_random_cost", best_random);
  }
  rep.metric("transport_cost", fac.transport_cost);
  rep.metric("identity_cost", fac.original_cost);
  rep.metric("points", n);
  return rep;
}

}  // namespace otlab
