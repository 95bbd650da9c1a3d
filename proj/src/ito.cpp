#include "otlab/ito.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "otlab/cf_determinant.hpp"
#include "otlab/rng.hpp"
#include "otlab/statistics.hpp"

namespace otlab {

namespace {

constexpr std::uint64_t kStreamPath = 0x1706;
constexpr std::uint64_t kStreamPathRotation = 0x707A;
constexpr std::uint64_t kStreamDriftFuture = 0xD41F;

MatrixXd haar_rotation(int dim, std::uint64_t seed) {
  CounterRng rng(seed);
  MatrixXd G(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      G(i, j) = rng.normal(0, static_cast<std::uint64_t>(i) * dim + j);
    }
  }
  Eigen::HouseholderQR<MatrixXd> qr(G);
  MatrixXd Q = qr.householderQ();
  const MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

// Quadratic data (S, h) of f in z coordinates; constant term not needed here.
void quadratic_terms(const Functional& f, MatrixXd* S, VectorXd* h) {
  const int m = f.dim();
  switch (f.kind()) {
    case Functional::Kind::Constant:
      *S = MatrixXd::Zero(m, m);
      *h = VectorXd::Zero(m);
      return;
    case Functional::Kind::Linear:
      *S = MatrixXd::Zero(m, m);
      *h = f.gradient(VectorXd::Zero(m));
      return;
    case Functional::Kind::Quadratic:
      *S = f.quadratic_data().S;
      *h = f.quadratic_data().h;
      return;
    default:
      throw ConfigError(
          "GaussianDriftModel: drift weights need quadratic-in-z data");
  }
}

double trapezoid_energy(const TimeGrid& grid, const Eigen::RowVectorXd& u) {
  double acc = 0.0;
  for (int i = 0; i < grid.steps(); ++i) {
    acc += grid.dt(i) * 0.5 * (u(i) * u(i) + u(i + 1) * u(i + 1));
  }
  return acc;
}

}  // namespace

TimeGrid TimeGrid::uniform(int steps) {
  if (steps < 1) throw ConfigError("TimeGrid: need at least one step");
  TimeGrid g;
  g.times = VectorXd::LinSpaced(steps + 1, 0.0, 1.0);
  g.times(0) = 0.0;
  g.times(steps) = 1.0;
  return g;
}

VectorXd TimeGrid::sqrt_dts() const {
  VectorXd s(steps());
  for (int i = 0; i < steps(); ++i) s(i) = std::sqrt(dt(i));
  return s;
}

PathBatch sample_paths(const TimeGrid& grid, int paths, std::uint64_t seed) {
  PathBatch batch;
  batch.grid = grid;
  batch.seed = seed;
  const int m = grid.steps();
  batch.increments.resize(paths, m);
  const CounterRng rng(seed);
  const VectorXd s = grid.sqrt_dts();
  for (int p = 0; p < paths; ++p) {
    for (int j = 0; j < m; ++j) {
      batch.increments(p, j) =
          s(j) *
          rng.normal(kStreamPath, static_cast<std::uint64_t>(p) * m + j);
    }
  }
  return batch;
}

MatrixXd to_z(const PathBatch& batch) {
  const VectorXd s = batch.grid.sqrt_dts();
  return batch.increments * s.cwiseInverse().asDiagonal();
}

MatrixXd cumulative(const TimeGrid& grid, const MatrixXd& increments) {
  const int m = grid.steps();
  if (increments.cols() != m) {
    throw DimensionMismatch("cumulative: increment count does not match grid");
  }
  MatrixXd w(increments.rows(), m + 1);
  w.col(0).setZero();
  for (int j = 0; j < m; ++j) w.col(j + 1) = w.col(j) + increments.col(j);
  return w;
}

Functional terminal_linear_z(const TimeGrid& grid, double a) {
  return Functional::linear(a * grid.sqrt_dts());
}

Functional terminal_quadratic_z(const TimeGrid& grid, double s) {
  const VectorXd r = grid.sqrt_dts();
  Functional f = Functional::quadratic(s * (r * r.transpose()),
                                       VectorXd::Zero(grid.steps()));
  if (s >= 0.0) f.with_convexity_lower_bound(0.0);
  return f;
}

PathTarget solve_path_transport(const TimeGrid& grid, const Functional& f_z,
                                double alpha, const SolverOptions& opts) {
  if (f_z.dim() != grid.steps()) {
    throw DimensionMismatch("solve_path_transport: functional dim vs grid");
  }
  PathTarget t{grid, LogConcaveDensity::make(f_z, alpha),
               TransportSolution::quadratic(MatrixXd::Zero(1, 1),
                                            VectorXd::Zero(1))};
  t.map = solve_transport(t.density, opts);
  return t;
}

MatrixXd transported_increments(const PathTarget& target,
                                const PathBatch& batch) {
  const MatrixXd z = to_z(batch);
  const VectorXd s = target.grid.sqrt_dts();
  MatrixXd out(z.rows(), z.cols());
  for (int p = 0; p < z.rows(); ++p) {
    out.row(p) = target.map.map(z.row(p).transpose()).transpose();
  }
  return out * s.asDiagonal();
}

GaussianDriftModel GaussianDriftModel::make(const TimeGrid& grid,
                                            const Functional& f_z) {
  const int m = grid.steps();
  MatrixXd S;
  VectorXd h;
  quadratic_terms(f_z, &S, &h);
  if (S.rows() != m) {
    throw DimensionMismatch("GaussianDriftModel: functional dim vs grid");
  }
  const MatrixXd P = MatrixXd::Identity(m, m) + S;

  GaussianDriftModel model;
  model.a_.resize(m + 1);
  model.b_.resize(m + 1);
  model.scale_.resize(m + 1);
  for (int k = 0; k < m; ++k) {
    const int nb = m - k;
    const MatrixXd Pbb = P.block(k, k, nb, nb);
    Eigen::LLT<MatrixXd> llt(Pbb);
    if (llt.info() != Eigen::Success) {
      throw NonIntegrableDensity(
          "GaussianDriftModel: I + S not positive definite");
    }
    VectorXd e0 = VectorXd::Zero(nb);
    e0(0) = 1.0;
    const VectorXd row = llt.solve(e0);  // first row of Pbb^{-1}
    model.a_[k] = k > 0 ? VectorXd(-(P.block(k, 0, nb, k).transpose() * row))
                        : VectorXd(0);
    model.b_(k) = -row.dot(h.segment(k, nb));
    model.scale_(k) = 1.0 / std::sqrt(grid.dt(k));
  }
  // Node t = 1: no future step left, the drift is the gradient in the final
  // increment, which the interior formula tends to.
  model.a_[m] = -S.row(m - 1).transpose();
  model.b_(m) = -h(m - 1);
  model.scale_(m) = 1.0 / std::sqrt(grid.dt(m - 1));
  return model;
}

double GaussianDriftModel::at(int k, const VectorXd& z_prefix) const {
  if (k < 0 || k > steps() || z_prefix.size() < a_[k].size()) {
    throw DimensionMismatch("GaussianDriftModel::at: bad node or prefix");
  }
  const double cond = a_[k].size() > 0
                          ? a_[k].dot(z_prefix.head(a_[k].size())) + b_(k)
                          : b_(k);
  return scale_(k) * cond;
}

MatrixXd drift_along(const GaussianDriftModel& model, const TimeGrid& grid,
                     const MatrixXd& increments) {
  const int m = grid.steps();
  if (increments.cols() != m || model.steps() != m) {
    throw DimensionMismatch("drift_along: increments vs grid vs model");
  }
  const VectorXd inv_s = grid.sqrt_dts().cwiseInverse();
  MatrixXd u(increments.rows(), m + 1);
  for (int p = 0; p < increments.rows(); ++p) {
    const VectorXd z = increments.row(p).transpose().cwiseProduct(inv_s);
    for (int k = 0; k <= m; ++k) u(p, k) = model.at(k, z);
  }
  return u;
}

double mc_drift(const Functional& f_z, const TimeGrid& grid, int node,
                const VectorXd& z_prefix, int samples, std::uint64_t seed) {
  const int m = grid.steps();
  if (node < 0 || node > m || z_prefix.size() != node) {
    throw DimensionMismatch("mc_drift: node and prefix disagree");
  }
  if (node == m) {
    return -f_z.gradient(z_prefix)(m - 1) / std::sqrt(grid.dt(m - 1));
  }
  const int nb = m - node;
  const CounterRng rng(seed);
  VectorXd z(m);
  z.head(node) = z_prefix;
  std::vector<double> logw(samples);
  std::vector<double> next(samples);
  for (int s = 0; s < samples; ++s) {
    for (int j = 0; j < nb; ++j) {
      z(node + j) = rng.normal(kStreamDriftFuture,
                               static_cast<std::uint64_t>(s) * nb + j);
    }
    logw[s] = -f_z.value(z);
    next[s] = z(node);
  }
  const double shift = *std::max_element(logw.begin(), logw.end());
  double sum_w = 0.0, sum_w2 = 0.0, sum_wx = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double w = std::exp(logw[s] - shift);
    sum_w += w;
    sum_w2 += w * w;
    sum_wx += w * next[s];
  }
  const double ess = sum_w * sum_w / sum_w2;
  if (!(ess >= kMinEffectiveSamples)) {
    throw DegenerateWeights("mc_drift: effective sample size " +
                            std::to_string(ess) + " below floor");
  }
  return (sum_wx / sum_w) / std::sqrt(grid.dt(node));
}

MatrixXd extract_brownian_part(const TimeGrid& grid, const MatrixXd& increments,
                               const MatrixXd& drift) {
  const int m = grid.steps();
  if (increments.cols() != m || drift.cols() != m + 1 ||
      increments.rows() != drift.rows()) {
    throw DimensionMismatch("extract_brownian_part: shape mismatch");
  }
  MatrixXd b(increments.rows(), m);
  for (int j = 0; j < m; ++j) {
    b.col(j) = increments.col(j) -
               grid.dt(j) * 0.5 * (drift.col(j) + drift.col(j + 1));
  }
  return b;
}

Report brownianity_check(const TimeGrid& grid, const MatrixXd& increments) {
  const int m = grid.steps();
  const int n = static_cast<int>(increments.rows());
  if (increments.cols() != m) {
    throw DimensionMismatch("brownianity_check: increments vs grid");
  }
  Report rep("brownianity");

  double worst_mean_z = 0.0, worst_var_z = 0.0;
  for (int j = 0; j < m; ++j) {
    const double mean = increments.col(j).mean();
    const double var =
        (increments.col(j).array() - mean).square().sum() / (n - 1);
    const double mean_z = std::abs(mean) / std::sqrt(grid.dt(j) / n);
    const double var_z = std::abs(var - grid.dt(j)) /
                         (grid.dt(j) * std::sqrt(2.0 / (n - 1)));
    worst_mean_z = std::max(worst_mean_z, mean_z);
    worst_var_z = std::max(worst_var_z, var_z);
  }
  rep.add_le("step_mean_worst_z", worst_mean_z, kMcSigmas, 0.0, "mc");
  rep.add_le("step_variance_worst_z", worst_var_z, kMcSigmas, 0.0, "mc");

  const MatrixXd normalized =
      increments * grid.sqrt_dts().cwiseInverse().asDiagonal();
  const double lag1 = lag1_correlation(normalized);
  const double lag1_z =
      std::abs(lag1) * std::sqrt(static_cast<double>(n) * (m - 1));
  rep.add_le("pooled_lag1_worst_z", lag1_z, kMcSigmas, 0.0, "mc");
  rep.metric("paths", n);
  rep.metric("steps", m);
  rep.metric("pooled_lag1", lag1);
  return rep;
}

Report ito_jacobian_check(const PathTarget& target,
                          const GaussianDriftModel& model,
                          const PathBatch& batch, double bias_tol) {
  const TimeGrid& grid = target.grid;
  const int m = grid.steps();
  const MatrixXd x = transported_increments(target, batch);
  const MatrixXd u = drift_along(model, grid, x);
  const VectorXd inv_s = grid.sqrt_dts().cwiseInverse();
  const double log_c = target.density.log_c();

  const int n = batch.paths();
  VectorXd rel(n);
  double max_log_err = 0.0;
  double mean_abs = 0.0;
  for (int p = 0; p < n; ++p) {
    double stoch = 0.0;
    for (int i = 0; i < m; ++i) stoch += u(p, i) * x(p, i);
    const double energy = trapezoid_energy(grid, u.row(p));
    const double log_lambda_hat = stoch - 0.5 * energy;
    const VectorXd z_t = x.row(p).transpose().cwiseProduct(inv_s);
    const double log_target = -target.density.f().value(z_t) - log_c;
    const double dlog = log_lambda_hat - log_target;
    rel(p) = std::expm1(dlog);
    mean_abs += std::abs(rel(p));
    max_log_err = std::max(max_log_err, std::abs(dlog));
  }
  mean_abs /= n;

  const McEstimate bias = mean_se(rel);
  Report rep("ito_jacobian");
  rep.add_abs_le("reconstruction_bias", bias.mean, bias_tol, "mc");
  rep.metric("bias_se", bias.se);
  rep.metric("mean_abs_relative_error", mean_abs);
  rep.metric("max_log_error", max_log_err);
  rep.metric("steps", m);
  rep.metric("paths", n);
  return rep;
}

Report path_rotation_check(const PathTarget& target, const PathBatch& batch,
                           int trials, std::uint64_t seed) {
  const TimeGrid& grid = target.grid;
  const int m = grid.steps();
  const int n = batch.paths();
  Report rep("path_rotation");

  const MatrixXd z = to_z(batch);
  MatrixXd tz(n, m);
  for (int p = 0; p < n; ++p) {
    tz.row(p) = target.map.map(z.row(p).transpose()).transpose();
  }

  // Map followed by its inverse returns the sample exactly.
  double worst_inv = 0.0;
  const int probe = std::min(n, 256);
  for (int p = 0; p < probe; ++p) {
    const VectorXd back = target.map.inverse(tz.row(p).transpose());
    worst_inv = std::max(
        worst_inv, (back - z.row(p).transpose()).cwiseAbs().maxCoeff() /
                       (1.0 + z.row(p).cwiseAbs().maxCoeff()));
  }
  rep.add_le("map_inverse_identity", worst_inv, 1e-12, 0.0, "structural");

  // Fresh sample pushed through a rotated map T(Rz): still the target law.
  const PathBatch fresh =
      sample_paths(grid, n, CounterRng::derive(batch.seed, 0xF0E5));
  const MatrixXd zb = to_z(fresh);
  const MatrixXd rot = haar_rotation(m, CounterRng::derive(seed, 0));
  MatrixXd rz(n, m);
  for (int p = 0; p < n; ++p) {
    rz.row(p) = target.map.map(rot * zb.row(p).transpose()).transpose();
  }
  const double crit = ks_critical(1e-3, n, n);
  double worst_ks = 0.0;
  for (int j = 0; j < m; ++j) {
    std::vector<double> a(tz.col(j).data(), tz.col(j).data() + n);
    std::vector<double> b(rz.col(j).data(), rz.col(j).data() + n);
    worst_ks = std::max(worst_ks, ks_distance_two_sample(a, b));
  }
  rep.add_le("rotated_pushforward_ks_coord", worst_ks, crit, 0.0, "mc");
  const VectorXd s = grid.sqrt_dts();
  {
    const VectorXd wa = tz * s;
    const VectorXd wb = rz * s;
    std::vector<double> a(wa.data(), wa.data() + n);
    std::vector<double> b(wb.data(), wb.data() + n);
    rep.add_le("rotated_pushforward_ks_terminal", ks_distance_two_sample(a, b),
               crit, 0.0, "mc");
  }

  // Transport cost of the rotated factorizations never beats the monotone map.
  const auto* q = target.map.as_quadratic();
  if (q != nullptr) {
    const MatrixXd ipn = MatrixXd::Identity(m, m) + q->N;
    const double cost_t =
        q->N.squaredNorm() + q->shift.squaredNorm();
    double worst_gap = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
      const MatrixXd r = haar_rotation(m, CounterRng::derive(seed, t + 1));
      const double cost_r = (ipn * r - MatrixXd::Identity(m, m)).squaredNorm() +
                            q->shift.squaredNorm();
      worst_gap = std::min(worst_gap, cost_r - cost_t);
    }
    rep.add_ge("monotone_cost_minimal", worst_gap, 0.0,
               1e-12 * (1.0 + cost_t), "closed-form");
    rep.metric("monotone_cost", cost_t);
  } else {
    double cost_t = 0.0;
    for (int p = 0; p < n; ++p) {
      cost_t += (tz.row(p) - z.row(p)).squaredNorm();
    }
    cost_t /= n;
    double worst_gap = std::numeric_limits<double>::infinity();
    double worst_se = 0.0;
    for (int t = 0; t < trials; ++t) {
      const MatrixXd r = haar_rotation(m, CounterRng::derive(seed, t + 1));
      VectorXd diff(n);
      for (int p = 0; p < n; ++p) {
        const VectorXd rzp = target.map.map(r * z.row(p).transpose());
        diff(p) = (rzp - z.row(p).transpose()).squaredNorm() -
                  (tz.row(p) - z.row(p)).squaredNorm();
      }
      const McEstimate est = mean_se(diff);
      if (est.mean - worst_gap < 0.0 || t == 0) {
        worst_gap = est.mean;
        worst_se = est.se;
      }
    }
    rep.add_ge("monotone_cost_minimal", worst_gap, 0.0,
               kMcSigmas * worst_se + 1e-12, "mc");
    rep.metric("monotone_cost", cost_t);
  }
  return rep;
}

Report free_energy_check(const PathTarget& target,
                         const GaussianDriftModel& model,
                         const PathBatch& batch) {
  const TimeGrid& grid = target.grid;
  const int m = grid.steps();
  const int n = batch.paths();
  const double free_energy = -target.density.log_c();
  Report rep("free_energy");
  rep.metric("free_energy", free_energy);

  // Gibbs form along target paths: E[f] plus the drift energy.
  const MatrixXd x = transported_increments(target, batch);
  const MatrixXd u = drift_along(model, grid, x);
  const VectorXd inv_s = grid.sqrt_dts().cwiseInverse();
  VectorXd gibbs(n);
  for (int p = 0; p < n; ++p) {
    const VectorXd z_t = x.row(p).transpose().cwiseProduct(inv_s);
    gibbs(p) = target.density.f().value(z_t) +
               0.5 * trapezoid_energy(grid, u.row(p));
  }
  const McEstimate path_est = mean_se(gibbs);
  rep.add_abs_le("gibbs_path_residual", path_est.mean - free_energy,
                 kMcSigmas * path_est.se + 1e-12, "mc");
  rep.metric("gibbs_path_estimate", path_est.mean);
  rep.metric("gibbs_path_se", path_est.se);

  // det2 form along the map: E[f(Tz) - log det2(I + hess phi) + |grad phi|^2/2].
  const MatrixXd z = to_z(batch);
  const auto* q = target.map.as_quadratic();
  double const_det2 = 0.0;
  if (q != nullptr) const_det2 = log_det2(HSPerturbation::make_symmetric(q->N));
  VectorXd det2_vals(n);
  for (int p = 0; p < n; ++p) {
    const VectorXd zp = z.row(p).transpose();
    const VectorXd g = target.map.grad_phi(zp);
    const double ld2 =
        q != nullptr
            ? const_det2
            : log_det2(HSPerturbation::make_symmetric(target.map.hessian_phi(zp)));
    det2_vals(p) = target.density.f().value(target.map.map(zp)) - ld2 +
                   0.5 * g.squaredNorm();
  }
  const McEstimate det2_est = mean_se(det2_vals);
  const bool assertable = target.density.h_convex() || q != nullptr;
  if (assertable) {
    rep.add_abs_le("det2_form_residual", det2_est.mean - free_energy,
                   kMcSigmas * det2_est.se + 1e-12, "mc");
  } else {
    rep.add_flag("det2_form_informative", true,
                 "density not H-convex, det2 identity reported only");
  }
  rep.metric("det2_form_estimate", det2_est.mean);
  rep.metric("det2_form_se", det2_est.se);
  rep.metric("paths", n);
  rep.metric("steps", m);
  return rep;
}

}  // namespace otlab
