#include "otlab/dim_lift.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <string>

#include "otlab/quadrature.hpp"
#include "otlab/rng.hpp"

namespace otlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kStreamInner = 0x1AA7;

std::string numbered(const char* base, int n) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_n%d", base, n);
  return buf;
}

VectorXd pad_to(const VectorXd& x, int d) {
  VectorXd out = VectorXd::Zero(d);
  out.head(x.size()) = x;
  return out;
}

// Weighted-point marginalizer: value, gradient and Hessian of
// -log sum_k w_k exp(-f(x, z_k)) in the kept coordinates.
class MarginalEvaluator {
 public:
  MarginalEvaluator(Functional f, int kept, MatrixXd zs, VectorXd log_w)
      : f_(std::move(f)),
        kept_(kept),
        zs_(std::move(zs)),
        log_w_(std::move(log_w)) {}

  double value(const VectorXd& x) const {
    const int m = static_cast<int>(zs_.rows());
    double best = -kInf;
    VectorXd terms(m);
    for (int k = 0; k < m; ++k) {
      terms(k) = log_w_(k) - f_.value(join(x, k));
      best = std::max(best, terms(k));
    }
    double acc = 0.0;
    for (int k = 0; k < m; ++k) acc += std::exp(terms(k) - best);
    return -(best + std::log(acc));
  }

  VectorXd grad(const VectorXd& x) const {
    VectorXd g;
    MatrixXd h;
    moments(x, g, h, /*need_hessian=*/false);
    return g;
  }

  MatrixXd hess(const VectorXd& x) const {
    VectorXd g;
    MatrixXd h;
    moments(x, g, h, /*need_hessian=*/true);
    return h;
  }

 private:
  VectorXd join(const VectorXd& x, int k) const {
    VectorXd full(kept_ + zs_.cols());
    full.head(kept_) = x;
    full.tail(zs_.cols()) = zs_.row(k).transpose();
    return full;
  }

  void moments(const VectorXd& x, VectorXd& g, MatrixXd& h,
               bool need_hessian) const {
    const int m = static_cast<int>(zs_.rows());
    VectorXd terms(m);
    double best = -kInf;
    for (int k = 0; k < m; ++k) {
      terms(k) = log_w_(k) - f_.value(join(x, k));
      best = std::max(best, terms(k));
    }
    double mass = 0.0;
    g = VectorXd::Zero(kept_);
    MatrixXd second = MatrixXd::Zero(kept_, kept_);
    for (int k = 0; k < m; ++k) {
      const double w = std::exp(terms(k) - best);
      if (w == 0.0) continue;
      mass += w;
      const VectorXd full = join(x, k);
      const VectorXd gk = f_.gradient(full).head(kept_);
      g += w * gk;
      if (need_hessian) {
        second += w * (f_.hessian(full).topLeftCorner(kept_, kept_) -
                       gk * gk.transpose());
      }
    }
    g /= mass;
    if (need_hessian) {
      h = second / mass + g * g.transpose();
      h = 0.5 * (h + h.transpose()).eval();
    }
  }

  Functional f_;
  int kept_;
  MatrixXd zs_;
  VectorXd log_w_;
};

Functional marginal_functional(const Functional& f, int n, MatrixXd zs,
                               VectorXd log_w) {
  auto ev = std::make_shared<MarginalEvaluator>(f, n, std::move(zs),
                                                std::move(log_w));
  return Functional::custom(
      n, [ev](const VectorXd& x) { return ev->value(x); },
      [ev](const VectorXd& x) { return ev->grad(x); },
      [ev](const VectorXd& x) { return ev->hess(x); });
}

}  // namespace

Functional condition_functional(const Functional& f, int n,
                                const LiftOptions& opts) {
  const int d = f.dim();
  if (n < 1 || n > d) {
    throw ConfigError("condition_functional: kept dimension out of range");
  }
  if (n == d) return f;
  const int k = d - n;

  switch (f.kind()) {
    case Functional::Kind::Constant:
    case Functional::Kind::Linear:
    case Functional::Kind::Quadratic: {
      const VectorXd zero = VectorXd::Zero(d);
      const MatrixXd S = f.hessian(zero);
      const VectorXd h = f.gradient(zero);
      const double c0 = f.value(zero);
      const MatrixXd S12 = S.topRightCorner(n, k);
      const MatrixXd M = MatrixXd::Identity(k, k) + S.bottomRightCorner(k, k);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
      if (es.eigenvalues().minCoeff() <= kSingularEigenTol) {
        throw NonIntegrableDensity(
            "condition_functional: integrated block I+S22 not positive "
            "definite");
      }
      const MatrixXd Minv = es.eigenvectors() *
                            es.eigenvalues().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
      const VectorXd h2 = h.tail(k);
      MatrixXd Sn = S.topLeftCorner(n, n) - S12 * Minv * S12.transpose();
      Sn = 0.5 * (Sn + Sn.transpose()).eval();
      const VectorXd hn = h.head(n) - S12 * (Minv * h2);
      const double cn = c0 + 0.5 * es.eigenvalues().array().log().sum() -
                        0.5 * h2.dot(Minv * h2);
      return Functional::quadratic(Sn, hn, cn);
    }
    case Functional::Kind::Separable: {
      std::vector<ScalarFunction> parts(f.separable_parts().begin(),
                                        f.separable_parts().begin() + n);
      double shift = 0.0;
      for (int i = n; i < d; ++i) {
        const auto& part = f.separable_parts()[i];
        const double ci = gaussian_expectation(
            [&part](double t) { return std::exp(-part.f(t)); });
        if (!(ci > 0.0) || !std::isfinite(ci)) {
          throw NonIntegrableDensity(
              "condition_functional: integrated coordinate has no mass");
        }
        shift -= std::log(ci);
      }
      const auto base = parts[0].f;
      parts[0].f = [base, shift](double t) { return base(t) + shift; };
      Functional out = Functional::separable(std::move(parts));
      if (f.convexity_lower_bound()) {
        out.with_convexity_lower_bound(*f.convexity_lower_bound());
      }
      return out;
    }
    case Functional::Kind::Custom: {
      if (f.depends_on_first() <= n) {
        const Functional fc = f;
        const int dd = d;
        Functional out = Functional::custom(
            n,
            [fc, dd](const VectorXd& x) { return fc.value(pad_to(x, dd)); },
            [fc, dd, n](const VectorXd& x) {
              return fc.gradient(pad_to(x, dd)).head(n).eval();
            },
            [fc, dd, n](const VectorXd& x) {
              return fc.hessian(pad_to(x, dd)).topLeftCorner(n, n).eval();
            });
        if (f.convexity_lower_bound()) {
          out.with_convexity_lower_bound(*f.convexity_lower_bound());
        }
        return out.with_depends_on_first(f.depends_on_first());
      }
      MatrixXd zs;
      VectorXd log_w;
      if (k <= 3) {
        const HermiteRule rule = gauss_hermite(opts.gh_order);
        const int ord = opts.gh_order;
        long total = 1;
        for (int j = 0; j < k; ++j) total *= ord;
        zs.resize(total, k);
        log_w.resize(total);
        const double log_sqrt_pi = 0.5 * std::log(M_PI);
        for (long idx = 0; idx < total; ++idx) {
          long rem = idx;
          double lw = 0.0;
          for (int j = 0; j < k; ++j) {
            const int node = static_cast<int>(rem % ord);
            rem /= ord;
            zs(idx, j) = std::sqrt(2.0) * rule.nodes(node);
            lw += std::log(rule.weights(node)) - log_sqrt_pi;
          }
          log_w(idx) = lw;
        }
      } else {
        const int count = opts.mc_count;
        zs.resize(count, k);
        CounterRng rng(CounterRng::derive(opts.mc_seed, n));
        for (int i = 0; i < count; ++i) {
          for (int j = 0; j < k; ++j) {
            zs(i, j) = rng.normal(kStreamInner,
                                  static_cast<std::uint64_t>(i) * k + j);
          }
        }
        log_w = VectorXd::Constant(count, -std::log(double(count)));
      }
      Functional out = marginal_functional(f, n, std::move(zs),
                                           std::move(log_w));
      if (f.convexity_lower_bound()) {
        out.with_convexity_lower_bound(*f.convexity_lower_bound());
      }
      return out;
    }
  }
  throw ConfigError("condition_functional: unknown functional kind");
}

LogConcaveDensity condition_density(const LogConcaveDensity& density, int n,
                                    const LiftOptions& opts) {
  const Functional fn = condition_functional(density.f(), n, opts);
  const double alpha = density.alpha();
  switch (fn.kind()) {
    case Functional::Kind::Constant:
    case Functional::Kind::Linear:
    case Functional::Kind::Quadratic:
    case Functional::Kind::Separable:
      return LogConcaveDensity::make(fn, alpha);
    case Functional::Kind::Custom:
      if (fn.dim() == 1) return LogConcaveDensity::make(fn, alpha);
      if (fn.dim() <= 3) {
        return LogConcaveDensity::make_gauss_hermite(fn, alpha, opts.gh_order);
      }
      return LogConcaveDensity::make_mc(
          fn, alpha, opts.mc_count, CounterRng::derive(opts.mc_seed, n, 1));
  }
  throw ConfigError("condition_density: unknown functional kind");
}

Report tower_property_check(const LogConcaveDensity& density,
                            const std::vector<int>& ns,
                            const LiftOptions& opts) {
  Report rep("tower_property");
  for (int n : ns) {
    const LogConcaveDensity cond = condition_density(density, n, opts);
    const double diff = cond.log_c() - density.log_c();
    const bool mc = cond.method() == NormalizationMethod::MonteCarlo ||
                    density.method() == NormalizationMethod::MonteCarlo;
    rep.metric(numbered("log_normalizer", n), cond.log_c());
    if (mc) {
      rep.add_flag(numbered("normalizer_preserved", n), true,
                   "Monte Carlo normalization, recorded without assertion");
      continue;
    }
    const bool closed =
        cond.method() == NormalizationMethod::ClosedFormQuadratic &&
        density.method() == NormalizationMethod::ClosedFormQuadratic;
    rep.add_abs_le(numbered("normalizer_preserved", n), diff,
                   closed ? 1e-10 : 1e-7,
                   closed ? "closed-form" : "quadrature");
  }
  return rep;
}

ConvergenceStudy convergence_study(const LogConcaveDensity& density,
                                   const std::vector<int>& ns,
                                   const SampleBatch& batch,
                                   const SolverOptions& sopts,
                                   const LiftOptions& lopts) {
  const int d = density.dim();
  if (batch.dim() != d) {
    throw DimensionMismatch("convergence_study: batch dimension mismatch");
  }
  ConvergenceStudy study;
  study.report.title = "dimension_convergence";
  const TransportSolution full = solve_transport(density, sopts);

  for (int n : ns) {
    const LogConcaveDensity cond = condition_density(density, n, lopts);
    const TransportSolution sol_n = solve_transport(cond, sopts);
    double e = 0.0, se = 0.0;
    if (full.as_quadratic() && sol_n.as_quadratic()) {
      const auto* qf = full.as_quadratic();
      const auto* qn = sol_n.as_quadratic();
      MatrixXd M = -qf->N;
      M.topLeftCorner(n, n) += qn->N;
      VectorXd b = -qf->shift;
      b.head(n) += qn->shift;
      e = M.squaredNorm() + b.squaredNorm();
    } else {
      const McEstimate est = mc_expect(
          [&](const VectorXd& x) {
            const VectorXd gn = sol_n.grad_phi(x.head(n));
            return (pad_to(gn, d) - full.grad_phi(x)).squaredNorm();
          },
          batch);
      e = est.mean;
      se = est.se;
    }
    study.dims.push_back(n);
    study.errors.push_back(e);
    study.ses.push_back(se);
    study.report.metric(numbered("gradient_error", n), e);
  }

  for (std::size_t i = 0; i + 1 < study.dims.size(); ++i) {
    const double slack =
        kLiftSigmas * (study.ses[i] + study.ses[i + 1]) + 1e-12;
    study.report.add_le(
        numbered("error_nonincreasing_to", study.dims[i + 1]),
        study.errors[i + 1] - study.errors[i], 0.0, slack,
        study.ses[i] + study.ses[i + 1] > 0.0 ? "mc" : "closed-form");
  }
  if (!study.dims.empty() && study.dims.back() == d) {
    study.report.add_le("terminal_error_zero", study.errors.back(), 0.0,
                        1e-15, "structural");
  }
  return study;
}

Report hessian_bound_study(const LogConcaveDensity& density,
                           const std::vector<int>& ns,
                           const SampleBatch& batch,
                           const SolverOptions& sopts,
                           const LiftOptions& lopts) {
  const int d = density.dim();
  if (batch.dim() != d) {
    throw DimensionMismatch("hessian_bound_study: batch dimension mismatch");
  }
  std::vector<int> order(ns);
  std::sort(order.begin(), order.end());

  Report rep("hessian_chain");
  std::vector<double> hs, hs_se, ch, ch_se;
  for (int n : order) {
    const LogConcaveDensity cond = condition_density(density, n, lopts);
    const TransportSolution sol_n = solve_transport(cond, sopts);
    double a = 0.0, a_se = 0.0, b = 0.0, b_se = 0.0;
    if (const auto* q = sol_n.as_quadratic()) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(q->N);
      for (int i = 0; i < n; ++i) {
        const double nu = es.eigenvalues()(i);
        a += nu * nu;
        b += nu * nu / (1.0 + nu);
      }
    } else {
      const McEstimate ea = mc_expect(
          [&](const VectorXd& x) {
            return sol_n.hessian_phi(x.head(n)).squaredNorm();
          },
          batch);
      const McEstimate eb = mc_expect(
          [&](const VectorXd& x) {
            const MatrixXd H = sol_n.hessian_phi(x.head(n));
            const MatrixXd I = MatrixXd::Identity(n, n);
            return ((I + H).partialPivLu().solve(H * H)).trace();
          },
          batch);
      a = ea.mean;
      a_se = ea.se;
      b = eb.mean;
      b_se = eb.se;
    }
    hs.push_back(a);
    hs_se.push_back(a_se);
    ch.push_back(b);
    ch_se.push_back(b_se);
    rep.metric(numbered("hessian_hs_sq", n), a);
    rep.metric(numbered("hessian_chain_term", n), b);
  }
  const double top_hs = hs.back(), top_ch = ch.back();
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    rep.add_le(numbered("hs_below_full", order[i]), hs[i],
               top_hs, kLiftSigmas * (hs_se[i] + hs_se.back()) + 1e-12,
               hs_se[i] + hs_se.back() > 0.0 ? "mc" : "closed-form");
    rep.add_le(numbered("chain_below_full", order[i]), ch[i],
               top_ch, kLiftSigmas * (ch_se[i] + ch_se.back()) + 1e-12,
               ch_se[i] + ch_se.back() > 0.0 ? "mc" : "closed-form");
  }
  return rep;
}

Functional product_double(const Functional& f) {
  const int d = f.dim();
  Functional out = Functional::constant(1, 0.0);
  switch (f.kind()) {
    case Functional::Kind::Constant:
      out = Functional::constant(2 * d, 2.0 * f.value(VectorXd::Zero(d)));
      break;
    case Functional::Kind::Linear:
    case Functional::Kind::Quadratic: {
      const VectorXd zero = VectorXd::Zero(d);
      const MatrixXd S = f.hessian(zero);
      const VectorXd h = f.gradient(zero);
      MatrixXd S2 = MatrixXd::Zero(2 * d, 2 * d);
      S2.topLeftCorner(d, d) = S;
      S2.bottomRightCorner(d, d) = S;
      VectorXd h2(2 * d);
      h2 << h, h;
      out = Functional::quadratic(S2, h2, 2.0 * f.value(zero));
      break;
    }
    case Functional::Kind::Separable: {
      std::vector<ScalarFunction> parts = f.separable_parts();
      for (const auto& p : f.separable_parts()) parts.push_back(p);
      out = Functional::separable(std::move(parts));
      break;
    }
    case Functional::Kind::Custom: {
      if (d == 1) {
        const Functional fc = f;
        ScalarFunction part{
            [fc](double t) {
              VectorXd v(1);
              v(0) = t;
              return fc.value(v);
            },
            [fc](double t) {
              VectorXd v(1);
              v(0) = t;
              return fc.gradient(v)(0);
            },
            [fc](double t) {
              VectorXd v(1);
              v(0) = t;
              return fc.hessian(v)(0, 0);
            }};
        out = Functional::separable({part, part});
        break;
      }
      const Functional fc = f;
      out = Functional::custom(
          2 * d,
          [fc, d](const VectorXd& x) {
            return fc.value(x.head(d)) + fc.value(x.tail(d));
          },
          [fc, d](const VectorXd& x) {
            VectorXd g(2 * d);
            g.head(d) = fc.gradient(x.head(d));
            g.tail(d) = fc.gradient(x.tail(d));
            return g;
          },
          [fc, d](const VectorXd& x) {
            MatrixXd H = MatrixXd::Zero(2 * d, 2 * d);
            H.topLeftCorner(d, d) = fc.hessian(x.head(d));
            H.bottomRightCorner(d, d) = fc.hessian(x.tail(d));
            return H;
          });
      break;
    }
  }
  if (f.convexity_lower_bound()) {
    out.with_convexity_lower_bound(*f.convexity_lower_bound());
  }
  return out;
}

Report talagrand_doubling_check(const LogConcaveDensity& density,
                                const SampleBatch& batch,
                                const SolverOptions& sopts) {
  const int d = density.dim();
  if (batch.dim() != d) {
    throw DimensionMismatch("talagrand_doubling_check: batch mismatch");
  }
  const TransportSolution sol_s = solve_transport(density, sopts);
  const Report w_s = wasserstein_identity(density, sol_s, batch);

  const Functional fd = product_double(density.f());
  LogConcaveDensity dd = [&]() {
    switch (fd.kind()) {
      case Functional::Kind::Custom:
        if (fd.dim() <= 3) {
          return LogConcaveDensity::make_gauss_hermite(fd, 2.0 * density.alpha(), 64);
        }
        return LogConcaveDensity::make_mc(fd, 2.0 * density.alpha(), 20000,
                                          CounterRng::derive(batch.seed, 0xD0B1));
      default:
        return LogConcaveDensity::make(fd, 2.0 * density.alpha());
    }
  }();
  const TransportSolution sol_d = solve_transport(dd, sopts);
  const SampleBatch batch_d = sample(GaussianSpace{2 * d}, batch.count(),
                                     CounterRng::derive(batch.seed, 0xD0B2));
  const Report w_d = wasserstein_identity(dd, sol_d, batch_d);

  Report rep("talagrand_doubling");
  const bool closed = sol_s.closed_form() && sol_d.closed_form() &&
                      density.method() == NormalizationMethod::ClosedFormQuadratic;
  const double tol = closed ? 1e-9 : 1e-4;
  const char* prov = closed ? "closed-form" : "quadrature";
  const char* names[3] = {"half_wasserstein_sq", "relative_entropy",
                          "talagrand_slack"};
  const char* checks[3] = {"distance_doubles", "entropy_doubles",
                           "slack_doubles"};
  for (int i = 0; i < 3; ++i) {
    const double single = w_s.metric_value(names[i]);
    const double doubled = w_d.metric_value(names[i]);
    rep.add_abs_le(checks[i], doubled - 2.0 * single,
                   tol * (1.0 + std::abs(doubled)), prov);
    rep.metric(std::string(names[i]) + "_single", single);
    rep.metric(std::string(names[i]) + "_double", doubled);
  }
  return rep;
}

Report exp_integrability_check(const TransportSolution& sol,
                               const SampleBatch& batch, double t) {
  if (batch.dim() != sol.dim()) {
    throw DimensionMismatch("exp_integrability_check: batch mismatch");
  }
  if (!(t > 0.0)) throw ConfigError("exp_integrability_check: t must be > 0");
  Report rep("exp_integrability");

  double criterion;
  double closed_log = 0.0;
  bool have_closed = false;
  if (const auto* q = sol.as_quadratic()) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q->N);
    const VectorXd w = es.eigenvectors().transpose() * q->shift;
    criterion = 0.0;
    for (int i = 0; i < sol.dim(); ++i) {
      criterion = std::max(criterion,
                           2.0 * t * es.eigenvalues()(i) * es.eigenvalues()(i));
    }
    if (criterion < 1.0) {
      have_closed = true;
      for (int i = 0; i < sol.dim(); ++i) {
        const double nu2 = es.eigenvalues()(i) * es.eigenvalues()(i);
        const double den = 1.0 - 2.0 * t * nu2;
        closed_log += -0.5 * std::log(den) + t * w(i) * w(i) / den;
      }
    }
  } else {
    double slope = 0.0;
    for (const auto& coord : *sol.as_coords()) {
      if (const auto* aff = std::get_if<TransportSolution::Affine1D>(&coord)) {
        slope = std::max(slope, std::abs(aff->slope - 1.0));
      } else {
        slope = std::max(slope, (std::get<Monotone1D>(coord).derivs().array() -
                                 1.0)
                                    .abs()
                                    .maxCoeff());
      }
    }
    criterion = 2.0 * t * slope * slope;
  }
  rep.metric("divergence_criterion", criterion);
  rep.metric("t", t);

  if (criterion >= 1.0) {
    rep.add_flag("exp_moment_divergent", true,
                 "2 t max slope^2 >= 1, moment generating integral diverges");
    return rep;
  }
  const McEstimate est = mc_expect(
      [&](const VectorXd& x) {
        return std::exp(t * sol.grad_phi(x).squaredNorm());
      },
      batch);
  rep.metric("exp_moment_estimate", est.mean);
  if (!std::isfinite(est.mean)) {
    rep.add_flag("exp_moment_finite", false, "sample average overflowed");
    return rep;
  }
  rep.add_flag("exp_moment_finite", true);
  if (have_closed) {
    rep.add_abs_le("exp_moment_vs_closed_form",
                   est.mean - std::exp(closed_log),
                   kMcSigmas * est.se + 1e-12, "mc");
    rep.metric("exp_moment_closed_form", std::exp(closed_log));
  }
  return rep;
}

}  // namespace otlab
