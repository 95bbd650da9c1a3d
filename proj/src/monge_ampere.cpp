#include "otlab/monge_ampere.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace otlab {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727418;
constexpr std::uint64_t kStreamCycle = 0xC1C;
constexpr double kInf = std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_or_neg_inf(double v) { return v > 0.0 ? std::log(v) : -kInf; }

// log Phi(x), full relative accuracy on the left tail.
double log_normal_cdf(double x) {
  if (x <= 0.0) return std::log(0.5 * std::erfc(-x / std::sqrt(2.0)));
  return std::log1p(-0.5 * std::erfc(x / std::sqrt(2.0)));
}

// log (1 - Phi(x)), full relative accuracy on the right tail.
double log_normal_sf(double x) { return log_normal_cdf(-x); }

void require_batch(int dim, const SampleBatch& batch, const char* who) {
  if (batch.dim() != dim) {
    throw DimensionMismatch(std::string(who) + ": batch dimension mismatch");
  }
  if (batch.count() < 2) {
    throw ConfigError(std::string(who) + ": batch needs at least two points");
  }
}

// Tabulated log-CDF / log-survival of the 1-D target, with per-node
// root solves T = F^{-1}(Phi(x)) carried out on whichever tail keeps full
// relative precision.
class TargetCdf1D {
 public:
  TargetCdf1D(std::function<double(double)> log_pdf, const VectorXd& xs,
              const QuadratureOptions& quad)
      : log_pdf_(std::move(log_pdf)), xs_(xs), quad_(quad) {
    const int n = static_cast<int>(xs.size());
    auto pdf = [this](double t) { return std::exp(log_pdf_(t)); };
    const double span = xs_(n - 1) - xs_(0);
    const double tail = 0.75 * span;
    log_left_.resize(n);
    log_right_.resize(n);
    log_left_[0] = log_or_neg_inf(integrate(pdf, xs_(0) - tail, xs_(0), quad_));
    log_right_[n - 1] =
        log_or_neg_inf(integrate(pdf, xs_(n - 1), xs_(n - 1) + tail, quad_));
    std::vector<double> log_cell(n - 1);
    for (int k = 0; k + 1 < n; ++k) {
      log_cell[k] = log_or_neg_inf(integrate(pdf, xs_(k), xs_(k + 1), quad_));
    }
    for (int k = 0; k + 1 < n; ++k) {
      log_left_[k + 1] = logaddexp(log_left_[k], log_cell[k]);
    }
    for (int k = n - 2; k >= 0; --k) {
      log_right_[k] = logaddexp(log_right_[k + 1], log_cell[k]);
    }
  }

  double total_mass() const {
    return std::exp(log_left_.back());  // right tail not included
  }
  double mass_with_tail() const {
    return std::exp(logaddexp(log_left_.back(), log_right_.back()));
  }

  // Solve F(t) = exp(log_p) from the left tail.
  double solve_left(double log_p) const {
    const int n = static_cast<int>(xs_.size());
    if (log_p <= log_left_[0]) return xs_(0);
    if (log_p >= log_left_[n - 1]) return xs_(n - 1);
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (log_left_[mid] >= log_p) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    const int j = lo;
    auto value_log = [&](double t) {
      auto pdf = [this](double s) { return std::exp(log_pdf_(s)); };
      return logaddexp(log_left_[j],
                       log_or_neg_inf(integrate(pdf, xs_(j), t, quad_)));
    };
    return newton(xs_(j), xs_(j + 1), log_left_[j], log_left_[j + 1], log_p,
                  value_log, /*survival=*/false);
  }

  // Solve 1 - F(t) = exp(log_q) from the right tail.
  double solve_right(double log_q) const {
    const int n = static_cast<int>(xs_.size());
    if (log_q <= log_right_[n - 1]) return xs_(n - 1);
    if (log_q >= log_right_[0]) return xs_(0);
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (log_right_[mid] >= log_q) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const int j = lo;
    auto value_log = [&](double t) {
      auto pdf = [this](double s) { return std::exp(log_pdf_(s)); };
      return logaddexp(log_right_[j + 1],
                       log_or_neg_inf(integrate(pdf, t, xs_(j + 1), quad_)));
    };
    return newton(xs_(j), xs_(j + 1), log_right_[j], log_right_[j + 1], log_q,
                  value_log, /*survival=*/true);
  }

 private:
  double newton(double a, double b, double level_a, double level_b,
                double target,
                const std::function<double(double)>& value_log,
                bool survival) const {
    double lo = a, hi = b;
    double t;
    if (std::isfinite(level_a) && std::isfinite(level_b) &&
        level_a != level_b) {
      t = a + (b - a) * (target - level_a) / (level_b - level_a);
      t = std::min(std::max(t, a), b);
    } else {
      t = 0.5 * (a + b);
    }
    for (int it = 0; it < 100; ++it) {
      const double lf = value_log(t);
      const double resid = lf - target;
      if (std::abs(resid) <= 1e-13) break;
      // Survival decreases in t, the CDF increases.
      const bool go_left = survival ? (resid < 0.0) : (resid > 0.0);
      if (go_left) {
        hi = t;
      } else {
        lo = t;
      }
      const double slope_log = log_pdf_(t) - lf;  // |d log F / dt|
      double tn;
      if (std::isfinite(slope_log)) {
        const double step = resid * std::exp(-slope_log);
        tn = survival ? t + step : t - step;
      } else {
        tn = 0.5 * (lo + hi);
      }
      if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
      if (std::abs(tn - t) <= 1e-15 * (1.0 + std::abs(t))) {
        t = tn;
        break;
      }
      t = tn;
    }
    return t;
  }

  std::function<double(double)> log_pdf_;
  VectorXd xs_;
  QuadratureOptions quad_;
  std::vector<double> log_left_;   // log F at grid nodes
  std::vector<double> log_right_;  // log (1 - F) at grid nodes
};

// Closed-form pieces of the quadratic solve, shared by solve_transport and
// the Wasserstein breakdown.
struct QuadraticSolve {
  MatrixXd S;
  VectorXd h;
  double c0 = 0.0;
  MatrixXd Q;       // (I+S)^{-1}
  MatrixXd sqrt_Q;  // symmetric root
  VectorXd m;       // -Q h
  VectorXd eig_S;
};

QuadraticSolve quadratic_solve(const Functional& f) {
  const int n = f.dim();
  const VectorXd zero = VectorXd::Zero(n);
  QuadraticSolve qs;
  qs.S = f.hessian(zero);
  qs.h = f.gradient(zero);
  qs.c0 = f.value(zero);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(qs.S);
  qs.eig_S = es.eigenvalues();
  if (n > 0 && 1.0 + qs.eig_S.minCoeff() <= kSingularEigenTol) {
    throw NonIntegrableDensity(
        "solve_transport: quadratic part must keep I+S positive definite");
  }
  VectorXd inv(n), root(n);
  for (int i = 0; i < n; ++i) {
    inv(i) = 1.0 / (1.0 + qs.eig_S(i));
    root(i) = std::sqrt(inv(i));
  }
  const MatrixXd V = es.eigenvectors();
  qs.Q = V * inv.asDiagonal() * V.transpose();
  qs.Q = 0.5 * (qs.Q + qs.Q.transpose()).eval();
  qs.sqrt_Q = V * root.asDiagonal() * V.transpose();
  qs.sqrt_Q = 0.5 * (qs.sqrt_Q + qs.sqrt_Q.transpose()).eval();
  qs.m = -qs.Q * qs.h;
  return qs;
}

double quadratic_entropy(const QuadraticSolve& qs, double log_c) {
  return -0.5 * ((qs.S * qs.Q).trace() + qs.m.dot(qs.S * qs.m)) -
         qs.h.dot(qs.m) - qs.c0 - log_c;
}

std::string tagged_name(const char* base, double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_t%02d",
                base, static_cast<int>(std::lround(100.0 * t)));
  return buf;
}

}  // namespace

Monotone1D solve_monotone_1d(const std::function<double(double)>& f,
                             double log_c, const SolverOptions& opts) {
  const int n = opts.grid.points;
  if (n < 16) throw ConfigError("solve_monotone_1d: grid too coarse");
  const double R = opts.grid.range;
  if (!(R > 0.0)) throw ConfigError("solve_monotone_1d: range must be positive");
  const double h = 2.0 * R / (n - 1);
  VectorXd xs(n);
  for (int i = 0; i < n; ++i) xs(i) = -R + i * h;
  xs(n - 1) = R;

  auto log_pdf = [f, log_c](double t) {
    return -f(t) - log_c - 0.5 * t * t - kLogSqrt2Pi;
  };
  const TargetCdf1D cdf(log_pdf, xs, opts.quad);
  const double mass = cdf.mass_with_tail();
  if (!(std::abs(mass - 1.0) <= 1e-3)) {
    throw QuadratureFailure(
        "solve_monotone_1d: target mass " + std::to_string(mass) +
        " inconsistent with the supplied normalization");
  }

  VectorXd Ts(n), dTs(n);
  for (int i = 0; i < n; ++i) {
    const double x = xs(i);
    const double t = x <= 0.0 ? cdf.solve_left(log_normal_cdf(x))
                              : cdf.solve_right(log_normal_sf(x));
    Ts(i) = t;
    dTs(i) = std::exp(-0.5 * x * x - kLogSqrt2Pi - log_pdf(t));
  }
  return Monotone1D(xs, Ts, dTs, log_pdf);
}

TransportSolution solve_transport(const LogConcaveDensity& density,
                                  const SolverOptions& opts) {
  const Functional& f = density.f();
  const int n = f.dim();
  switch (f.kind()) {
    case Functional::Kind::Constant:
    case Functional::Kind::Linear:
    case Functional::Kind::Quadratic: {
      const QuadraticSolve qs = quadratic_solve(f);
      return TransportSolution::quadratic(
          qs.sqrt_Q - MatrixXd::Identity(n, n), qs.m);
    }
    case Functional::Kind::Separable: {
      std::vector<TransportSolution::Coord> coords;
      coords.reserve(f.separable_parts().size());
      for (const auto& part : f.separable_parts()) {
        const double ci = gaussian_expectation(
            [&part](double t) { return std::exp(-part.f(t)); },
            opts.grid.range, opts.quad);
        if (!(ci > 0.0) || !std::isfinite(ci)) {
          throw NonIntegrableDensity(
              "solve_transport: coordinate normalizer is not positive");
        }
        coords.emplace_back(solve_monotone_1d(part.f, std::log(ci), opts));
      }
      return TransportSolution::composite(std::move(coords));
    }
    case Functional::Kind::Custom: {
      if (n == 1) {
        const Functional fc = f;
        auto scalar = [fc](double t) {
          VectorXd v(1);
          v(0) = t;
          return fc.value(v);
        };
        return TransportSolution::monotone1d(
            solve_monotone_1d(scalar, density.log_c(), opts));
      }
      throw UnsolvableRegime(
          "solve_transport: multidimensional non-separable targets need a "
          "quadratic potential");
    }
  }
  throw ConfigError("solve_transport: unknown functional kind");
}

double log_ma_lhs(const LogConcaveDensity& density,
                  const TransportSolution& sol, const VectorXd& x) {
  return density.log_c() + density.f().value(sol.map(x));
}

double log_ma_rhs(const TransportSolution& sol, const VectorXd& x) {
  const double ld2 = log_det2(HSPerturbation::make_symmetric(sol.hessian_phi(x)));
  return ld2 - sol.ou_phi(x) - 0.5 * sol.grad_phi(x).squaredNorm();
}

double default_ma_tolerance(const TransportSolution& sol) {
  return sol.closed_form() ? 1e-6 : 1e-4;
}

MAReport ma_residual(const LogConcaveDensity& density,
                     const TransportSolution& sol, const SampleBatch& batch,
                     double tol) {
  require_batch(sol.dim(), batch, "ma_residual");
  MAReport out;
  out.tolerance = tol;
  out.report.title = "monge_ampere_residual";
  double sum = 0.0;
  for (int i = 0; i < batch.count(); ++i) {
    const VectorXd x = batch.points.row(i).transpose();
    const double lhs = log_ma_lhs(density, sol, x);
    const double rhs = log_ma_rhs(sol, x);
    const double rel = std::abs(std::expm1(rhs - lhs));
    out.max_relative_residual = std::max(out.max_relative_residual, rel);
    sum += rel;
  }
  out.mean_relative_residual = sum / batch.count();
  out.report.add_le("ma_max_relative_residual", out.max_relative_residual, tol,
                    0.0, sol.closed_form() ? "closed-form" : "quadrature");
  out.report.metric("ma_mean_relative_residual", out.mean_relative_residual);
  out.report.metric("ma_points", batch.count());
  return out;
}

Report subsolution_check(const LogConcaveDensity& density,
                         const TransportSolution& sol,
                         const SampleBatch& batch, double tol) {
  require_batch(sol.dim(), batch, "subsolution_check");
  Report rep("subsolution");
  // log L(Tx) + log Lambda(x) <= 0, with equality on the regular instances.
  double worst = -kInf;
  for (int i = 0; i < batch.count(); ++i) {
    const VectorXd x = batch.points.row(i).transpose();
    const VectorXd tx = sol.map(x);
    worst = std::max(
        worst, log_ma_rhs(sol, x) - density.f().value(tx) - density.log_c());
  }
  rep.add_le("pointwise_domination", worst, 0.0, tol,
             sol.closed_form() ? "closed-form" : "quadrature");

  // E[g(Tx) Lambda(x)] - E[g(x)] <= 0 for nonnegative g, as difference
  // estimators sharing the sample points.
  VectorXd freq(sol.dim());
  for (int j = 0; j < sol.dim(); ++j) freq(j) = (j % 2 == 0) ? 0.7 : -0.4;
  const std::vector<
      std::pair<std::string, std::function<double(const VectorXd&)>>>
      tests = {
          {"unit", [](const VectorXd&) { return 1.0; }},
          {"bump",
           [](const VectorXd& y) { return std::exp(-0.25 * y.squaredNorm()); }},
          {"cauchy",
           [](const VectorXd& y) { return 1.0 / (1.0 + y.squaredNorm()); }},
          {"cosine",
           [&](const VectorXd& y) {
             const double c = std::cos(freq.dot(y));
             return c * c;
           }},
          {"energy", [](const VectorXd& y) { return y.squaredNorm(); }},
      };
  for (const auto& [name, g] : tests) {
    const McEstimate est = mc_expect(
        [&](const VectorXd& x) {
          return g(sol.map(x)) * std::exp(log_ma_rhs(sol, x)) - g(x);
        },
        batch);
    rep.add_le("mean_domination_" + name, est.mean, 0.0,
               kMcSigmas * est.se + 1e-12, "mc");
  }
  return rep;
}

Report wasserstein_identity(const LogConcaveDensity& density,
                            const TransportSolution& sol,
                            const SampleBatch& batch) {
  require_batch(sol.dim(), batch, "wasserstein_identity");
  Report rep("wasserstein_identity");
  const Functional& f = density.f();
  double half_d2 = 0.0, entropy = 0.0, det2_term = 0.0;
  double tol = 0.0;
  std::string prov;

  const bool quadratic_kind = f.kind() == Functional::Kind::Constant ||
                              f.kind() == Functional::Kind::Linear ||
                              f.kind() == Functional::Kind::Quadratic;
  if (sol.as_quadratic() && quadratic_kind &&
      density.method() != NormalizationMethod::MonteCarlo) {
    const auto* q = sol.as_quadratic();
    half_d2 = 0.5 * (q->N.squaredNorm() + q->shift.squaredNorm());
    const QuadraticSolve qs = quadratic_solve(f);
    entropy = quadratic_entropy(qs, density.log_c());
    det2_term = log_det2(HSPerturbation::make_symmetric(q->N));
    tol = kClosedFormTol * (1.0 + std::abs(entropy) + half_d2);
    prov = "closed-form";
  } else if (sol.as_coords() &&
             (f.kind() == Functional::Kind::Separable || f.dim() == 1)) {
    std::vector<std::function<double(double)>> parts;
    std::vector<double> log_cs;
    if (f.kind() == Functional::Kind::Separable) {
      for (const auto& part : f.separable_parts()) {
        parts.push_back(part.f);
        log_cs.push_back(std::log(gaussian_expectation(
            [&part](double t) { return std::exp(-part.f(t)); })));
      }
    } else {
      const Functional fc = f;
      parts.push_back([fc](double t) {
        VectorXd v(1);
        v(0) = t;
        return fc.value(v);
      });
      log_cs.push_back(density.log_c());
    }
    const auto& coords = *sol.as_coords();
    if (coords.size() != parts.size()) {
      throw ConfigError("wasserstein_identity: coordinate count mismatch");
    }
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const auto fi = parts[i];
      const double lci = log_cs[i];
      if (const auto* aff = std::get_if<TransportSolution::Affine1D>(&coords[i])) {
        const double a = aff->slope, b = aff->intercept;
        half_d2 += 0.5 * ((a - 1.0) * (a - 1.0) + b * b);
        det2_term += log_det2_scalar(a - 1.0);
      } else {
        const auto& m = std::get<Monotone1D>(coords[i]);
        half_d2 += 0.5 * gaussian_expectation([&m](double t) {
          const double d = m.map(t) - t;
          return d * d;
        });
        det2_term += gaussian_expectation(
            [&m](double t) { return log_det2_scalar(m.deriv(t) - 1.0); });
      }
      entropy += gaussian_expectation([&fi, lci](double t) {
        const double log_l = -fi(t) - lci;
        return std::exp(log_l) * log_l;
      });
    }
    tol = 1e-6;
    prov = "quadrature";
  } else {
    const McEstimate comb = mc_expect(
        [&](const VectorXd& x) {
          const double half = 0.5 * sol.grad_phi(x).squaredNorm();
          const double log_l = -f.value(x) - density.log_c();
          const double llogl = std::exp(log_l) * log_l;
          const double ld2 = log_det2(
              HSPerturbation::make_symmetric(sol.hessian_phi(x)));
          return half - llogl - ld2;
        },
        batch);
    half_d2 = mc_expect(
                  [&](const VectorXd& x) {
                    return 0.5 * sol.grad_phi(x).squaredNorm();
                  },
                  batch)
                  .mean;
    entropy = mc_expect(
                  [&](const VectorXd& x) {
                    const double log_l = -f.value(x) - density.log_c();
                    return std::exp(log_l) * log_l;
                  },
                  batch)
                  .mean;
    det2_term = half_d2 - entropy - comb.mean;
    tol = kMcSigmas * comb.se + 1e-12;
    prov = "mc";
  }

  rep.add_abs_le("wasserstein_identity_residual",
                 half_d2 - entropy - det2_term, tol, prov);
  rep.add_le("det2_term_nonpositive", det2_term, 0.0, tol, prov);
  rep.add_le("talagrand_inequality", 2.0 * half_d2, 2.0 * entropy, tol, prov);
  rep.metric("half_wasserstein_sq", half_d2);
  rep.metric("relative_entropy", entropy);
  rep.metric("det2_term", det2_term);
  rep.metric("talagrand_slack", 2.0 * (entropy - half_d2));
  return rep;
}

Report interpolation_bound(const LogConcaveDensity& density,
                           const TransportSolution& sol,
                           const SampleBatch& batch,
                           const std::vector<double>& ts) {
  require_batch(sol.dim(), batch, "interpolation_bound");
  Report rep("interpolation_bound");
  if (!std::isfinite(density.alpha())) {
    rep.add_flag("interpolation_bound_inapplicable", true,
                 "no finite lower bound on f declared");
    return rep;
  }
  const double tol = sol.closed_form() ? 1e-9 : 1e-6;
  const std::string prov = sol.closed_form() ? "closed-form" : "quadrature";
  for (double t : ts) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw ConfigError("interpolation_bound: t must lie in [0,1]");
    }
    double worst = -kInf;
    for (int i = 0; i < batch.count(); ++i) {
      const VectorXd x = batch.points.row(i).transpose();
      const MatrixXd H = sol.hessian_phi(x);
      const double log_lambda_t =
          log_det2(HSPerturbation::make_symmetric(t * H)) -
          t * sol.ou_phi(x) -
          0.5 * t * t * sol.grad_phi(x).squaredNorm();
      worst = std::max(worst, -log_lambda_t);
    }
    const double bound = t * (density.alpha() - density.log_c());
    rep.add_le(tagged_name("interpolant_sup_bound", t), worst, bound, tol,
               prov);
  }
  return rep;
}

Report lipschitz_check(const LogConcaveDensity& density,
                       const TransportSolution& sol,
                       const SampleBatch& batch) {
  require_batch(sol.dim(), batch, "lipschitz_check");
  Report rep("lipschitz_gate");
  double grad_lip = 0.0;
  double contraction = 0.0;
  double tol;
  std::string prov;
  if (const auto* q = sol.as_quadratic()) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q->N);
    grad_lip = es.eigenvalues().cwiseAbs().maxCoeff();
    contraction = 1.0 + es.eigenvalues().maxCoeff();
    tol = 1e-12;
    prov = "closed-form";
  } else {
    for (const auto& coord : *sol.as_coords()) {
      if (const auto* aff = std::get_if<TransportSolution::Affine1D>(&coord)) {
        grad_lip = std::max(grad_lip, std::abs(aff->slope - 1.0));
        contraction = std::max(contraction, aff->slope);
      } else {
        const auto& m = std::get<Monotone1D>(coord);
        grad_lip = std::max(
            grad_lip, (m.derivs().array() - 1.0).abs().maxCoeff());
        contraction = std::max(contraction, m.derivs().maxCoeff());
      }
    }
    tol = 1e-9;
    prov = "grid-scan";
  }

  double secant = 0.0;
  for (int i = 0; i + 1 < batch.count(); ++i) {
    const VectorXd x = batch.points.row(i).transpose();
    const VectorXd y = batch.points.row(i + 1).transpose();
    const double gap = (x - y).norm();
    if (gap < 1e-12) continue;
    secant = std::max(secant, (sol.map(x) - sol.map(y)).norm() / gap);
  }

  rep.metric("gradient_lipschitz", grad_lip);
  rep.metric("map_contraction", contraction);
  rep.metric("map_contraction_secant", secant);
  rep.metric("hypothesis_h_convex", density.h_convex() ? 1.0 : 0.0);
  if (density.h_convex()) {
    rep.add_le("gradient_lipschitz_bound", grad_lip, 1.0, tol, prov);
    rep.add_le("map_contraction_bound", contraction, 1.0, tol, prov);
  } else {
    rep.add_flag("contraction_gate_informative", true,
                 "H-convexity fails; constants reported without assertion");
  }
  return rep;
}

Report cyclic_monotonicity_check(const TransportSolution& sol,
                                 const SampleBatch& batch, int cycles,
                                 std::uint64_t seed) {
  require_batch(sol.dim(), batch, "cyclic_monotonicity_check");
  Report rep("cyclic_monotonicity");
  CounterRng rng(seed);
  double worst = -kInf;
  double scale = 0.0;
  std::uint64_t draw = 0;
  for (int trial = 0; trial < cycles; ++trial) {
    const int len =
        2 + static_cast<int>(rng.bits(kStreamCycle, draw++) % 4);
    std::vector<int> idx(len);
    for (int k = 0; k < len; ++k) {
      idx[k] = static_cast<int>(rng.bits(kStreamCycle, draw++) %
                                static_cast<std::uint64_t>(batch.count()));
    }
    double s = 0.0;
    for (int k = 0; k < len; ++k) {
      const VectorXd x = batch.points.row(idx[k]).transpose();
      const VectorXd xn = batch.points.row(idx[(k + 1) % len]).transpose();
      const VectorXd tx = sol.map(x);
      s += tx.dot(xn - x);
      scale = std::max(scale, tx.norm() * (xn - x).norm());
    }
    worst = std::max(worst, s);
  }
  rep.add_le("cyclic_monotonicity_max", worst, 0.0, 1e-9 * (1.0 + scale),
             "closed-form");
  rep.metric("cycles", cycles);
  return rep;
}

VectorField linear_field(MatrixXd M) {
  if (M.rows() != M.cols()) {
    throw DimensionMismatch("linear_field: matrix must be square");
  }
  VectorField out;
  out.dim = static_cast<int>(M.rows());
  const MatrixXd Mc = std::move(M);
  out.value = [Mc](const VectorXd& x) -> VectorXd { return Mc * x; };
  out.jacobian = [Mc](const VectorXd&) -> MatrixXd { return Mc; };
  return out;
}

double gaussian_divergence(const VectorField& xi, const VectorXd& x) {
  if (xi.dim != x.size()) {
    throw DimensionMismatch("gaussian_divergence: dimension mismatch");
  }
  return xi.value(x).dot(x) - xi.jacobian(x).trace();
}

Report divergence_composition_check(const VectorField& xi,
                                    const VectorField& u,
                                    const SampleBatch& batch) {
  if (xi.dim != u.dim) {
    throw DimensionMismatch("divergence_composition_check: field dims differ");
  }
  require_batch(xi.dim, batch, "divergence_composition_check");
  Report rep("divergence_composition");
  double worst = 0.0;
  for (int i = 0; i < batch.count(); ++i) {
    const VectorXd x = batch.points.row(i).transpose();
    const VectorXd ux = u.value(x);
    const VectorXd mx = x + ux;
    const VectorXd xi_mx = xi.value(mx);
    const MatrixXd jac_xi = xi.jacobian(mx);
    const MatrixXd jac_u = u.jacobian(x);

    const double lhs = xi_mx.dot(mx) - jac_xi.trace();
    const double div_composed =
        xi_mx.dot(x) - (jac_xi * (MatrixXd::Identity(xi.dim, xi.dim) + jac_u))
                           .trace();
    const double rhs =
        div_composed + xi_mx.dot(ux) + (jac_xi * jac_u).trace();
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
  }
  rep.add_le("composition_identity", worst, 1e-12, 0.0, "closed-form");
  return rep;
}

}  // namespace otlab
