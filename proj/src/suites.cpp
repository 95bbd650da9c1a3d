#include "otlab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "otlab/assignment.hpp"
#include "otlab/cf_determinant.hpp"
#include "otlab/dim_lift.hpp"
#include "otlab/gaussian.hpp"
#include "otlab/ito.hpp"
#include "otlab/monge_ampere.hpp"
#include "otlab/polar.hpp"
#include "otlab/rng.hpp"
#include "otlab/transport.hpp"

namespace otlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Frozen closed-form anchors.
constexpr double kDet2HalfShrink = 0.8243606353500641;   // 0.5 e^{1/2}
constexpr double kDet2UnitStretch = 0.7357588823428847;  // 2 e^{-1}
constexpr double kRot03Stretch = 0.044030650891055016;   // sqrt(1.09) - 1
constexpr double kCoupledNormalizer = 0.5163977794943222;  // 2 / sqrt(15)

struct Instance {
  std::string name;
  std::string summary;

  std::optional<MatrixXd> K;  // linear perturbation face
  std::optional<double> det2_oracle;

  std::optional<Functional> f;  // density face exp(-f)/c
  double alpha = 0.0;

  std::optional<MatrixXd> Q;  // centered Gaussian target face

  enum class Path { None, Linear, Quadratic } path = Path::None;
  double path_param = 0.0;

  bool expect_expansion = false;

  std::vector<std::string> suites() const {
    std::vector<std::string> s;
    if (K.has_value()) {
      s.push_back("detcf");
      s.push_back("polar");
    }
    if (Q.has_value()) s.push_back("gaussmap");
    if (f.has_value()) {
      s.push_back("ma-verify");
      if (f->kind() == Functional::Kind::Quadratic && f->dim() >= 1) {
        s.push_back("dimlift");
      }
    }
    if (path != Path::None) s.push_back("ito-sim");
    return s;
  }

  bool supports(const std::string& suite) const {
    const auto s = suites();
    return std::find(s.begin(), s.end(), suite) != s.end();
  }
};

std::vector<Instance> build_instances() {
  std::vector<Instance> out;

  {
    Instance inst;
    inst.name = "canonical-quadratic";
    inst.summary =
        "f = (3/2) x^2 in one dimension: every identity in closed form";
    inst.f = Functional::quadratic(3.0 * MatrixXd::Identity(1, 1),
                                   VectorXd::Zero(1));
    inst.f->with_convexity_lower_bound(3.0);
    inst.alpha = 0.0;
    inst.K = -0.5 * MatrixXd::Identity(1, 1);  // the solved map shift
    inst.det2_oracle = kDet2HalfShrink;
    inst.Q = 0.25 * MatrixXd::Identity(1, 1);
    out.push_back(std::move(inst));
  }
  {
    Instance inst;
    inst.name = "gaussian-4";
    inst.summary =
        "target N(0, diag(4,1)): an expanding map outside the H-convex class";
    MatrixXd S(2, 2);
    S << -0.75, 0.0, 0.0, 0.0;
    inst.f = Functional::quadratic(S, VectorXd::Zero(2), std::log(2.0));
    inst.f->with_convexity_lower_bound(-0.75);
    inst.alpha = kInf;  // f is unbounded below
    MatrixXd K(2, 2);
    K << 1.0, 0.0, 0.0, 0.0;
    inst.K = K;
    inst.det2_oracle = kDet2UnitStretch;
    MatrixXd Q(2, 2);
    Q << 4.0, 0.0, 0.0, 1.0;
    inst.Q = Q;
    inst.expect_expansion = true;
    out.push_back(std::move(inst));
  }
  {
    Instance inst;
    inst.name = "polar-rot-03";
    inst.summary = "antisymmetric K = [[0, .3], [-.3, 0]]: pure rotation with "
                   "isotropic stretch";
    MatrixXd K(2, 2);
    K << 0.0, 0.3, -0.3, 0.0;
    inst.K = K;
    out.push_back(std::move(inst));
  }
  {
    Instance inst;
    inst.name = "linear-a1";
    inst.summary = "f = x (first coordinate / terminal value): a pure shift, "
                   "exact at machine precision";
    inst.f = Functional::linear(VectorXd::Ones(1));
    inst.f->with_convexity_lower_bound(0.0);
    inst.alpha = kInf;  // f is unbounded below
    inst.path = Instance::Path::Linear;
    inst.path_param = 1.0;
    out.push_back(std::move(inst));
  }
  {
    Instance inst;
    inst.name = "coupled-2d";
    inst.summary =
        "f = (x^2 + y^2)/2 + xy/2: correlated quadratic, the conditioning "
        "chain in closed form";
    MatrixXd S(2, 2);
    S << 1.0, 0.5, 0.5, 1.0;
    inst.f = Functional::quadratic(S, VectorXd::Zero(2));
    inst.f->with_convexity_lower_bound(0.5);
    inst.alpha = 0.0;
    inst.K = S;  // symmetric perturbation face
    inst.Q = (MatrixXd::Identity(2, 2) + S).inverse();
    out.push_back(std::move(inst));
  }
  {
    Instance inst;
    inst.name = "quartic-1d";
    inst.summary = "f = x^4/4: strictly convex non-quadratic target for the "
                   "tabulated 1-D solver";
    ScalarFunction part;
    part.f = [](double x) { return 0.25 * x * x * x * x; };
    part.df = [](double x) { return x * x * x; };
    part.ddf = [](double x) { return 3.0 * x * x; };
    inst.f = Functional::separable({part});
    inst.f->with_convexity_lower_bound(0.0);
    inst.alpha = 0.0;
    out.push_back(std::move(inst));
  }
  {
    Instance inst;
    inst.name = "counterexample-n04";
    inst.summary = "target N(0, 4): the expansion that the contraction gate "
                   "must refuse to certify";
    inst.f = Functional::quadratic(-0.75 * MatrixXd::Identity(1, 1),
                                   VectorXd::Zero(1), 0.5 * std::log(4.0));
    inst.f->with_convexity_lower_bound(-0.75);
    inst.alpha = kInf;
    inst.expect_expansion = true;
    out.push_back(std::move(inst));
  }
  {
    Instance inst;
    inst.name = "quad-w1";
    inst.summary = "path functional f = (3/2) W_1^2: the canonical quadratic "
                   "driven through the time grid";
    inst.path = Instance::Path::Quadratic;
    inst.path_param = 3.0;
    out.push_back(std::move(inst));
  }
  return out;
}

Instance find_instance(const std::string& name) {
  for (auto& inst : build_instances()) {
    if (inst.name == name) return inst;
  }
  throw ConfigError("unknown instance '" + name + "'");
}

SolverOptions solver_options(const SuiteConfig& cfg) {
  SolverOptions opts;
  opts.grid.points = cfg.grid_points;
  opts.grid.range = cfg.grid_range;
  return opts;
}

std::uint64_t child_seed(const SuiteConfig& cfg, std::uint64_t tag) {
  return CounterRng::derive(cfg.seed, tag);
}

Report run_detcf(const Instance& inst, const SuiteConfig& cfg) {
  const MatrixXd& K = *inst.K;
  const int n = static_cast<int>(K.rows());
  Report rep("detcf/" + inst.name);

  const HSPerturbation pert = HSPerturbation::general(K);
  const double d2 = det2(pert);
  rep.metric("det2", d2);
  if (inst.det2_oracle.has_value()) {
    rep.add_eq("det2_closed_form", d2, *inst.det2_oracle, 1e-13,
               "closed-form");
  }
  rep.add_eq("det2_identity_at_zero",
             det2(HSPerturbation::general(MatrixXd::Zero(n, n))), 1.0, 0.0,
             "closed-form");
  if (n == 1) {
    rep.add_eq("det2_scalar_consistency", std::log(d2),
               log_det2_scalar(K(0, 0)), 1e-14, "closed-form");
  }
  const MatrixXd sym = 0.5 * (K + K.transpose());
  const double general_on_sym =
      log_abs_det2(HSPerturbation::general(sym)).log_abs;
  const double symmetric_path =
      log_abs_det2(HSPerturbation::make_symmetric(sym)).log_abs;
  rep.add_eq("symmetric_path_consistency", general_on_sym, symmetric_path,
             1e-12 * (1.0 + std::abs(symmetric_path)), "closed-form");

  const SampleBatch batch =
      sample(GaussianSpace{n}, cfg.samples, child_seed(cfg, 0xDE7));
  rep.absorb(girsanov_density_check(K, batch), "girsanov.");
  return rep;
}

Report run_polar(const Instance& inst, const SuiteConfig& cfg) {
  const MatrixXd& K = *inst.K;
  const int n = static_cast<int>(K.rows());
  Report rep("polar/" + inst.name);

  const SampleBatch batch =
      sample(GaussianSpace{n}, cfg.samples, child_seed(cfg, 0x901A));

  rep.absorb(polar_consistency_check(K), "factors.");
  rep.absorb(minimal_rotation_check(K, batch, cfg.trials,
                                    child_seed(cfg, 0x907)),
             "procrustes.");
  const PolarFactors factors = polar_factorize(K);
  rep.absorb(right_inverse_check(factors.Kbar, batch), "inverse.");
  rep.absorb(helmholtz_split_check(K, batch), "split.");

  if (inst.name == "polar-rot-03") {
    const MatrixXd dev =
        factors.Kbar - kRot03Stretch * MatrixXd::Identity(n, n);
    rep.add_le("stretch_isotropy_deviation", dev.cwiseAbs().maxCoeff(), 1e-12,
               0.0, "closed-form");
  }

  const int pts = std::min(cfg.oracle_points, batch.count());
  const MatrixXd X = batch.points.topRows(pts);
  const MatrixXd Y = X * (MatrixXd::Identity(n, n) + K).transpose();
  rep.absorb(factorization_check(X, Y, cfg.trials, child_seed(cfg, 0xFAC)),
             "assignment.");
  return rep;
}

Report run_gaussmap(const Instance& inst, const SuiteConfig& cfg) {
  Report rep("gaussmap/" + inst.name);
  const GaussianTarget target = GaussianTarget::make(*inst.Q);
  const TransportSolution map = gaussian_target_map(target);
  const SampleBatch batch = sample(GaussianSpace{target.dim()}, cfg.samples,
                                   child_seed(cfg, 0x6A05));

  rep.metric("half_wasserstein_sq",
             0.5 * (target.sqrt_Q - MatrixXd::Identity(target.dim(),
                                                       target.dim()))
                       .squaredNorm());
  rep.absorb(characteristic_function_check(target, map, batch, cfg.probes,
                                           child_seed(cfg, 0xCF1)),
             "charfn.");
  rep.absorb(moment_recovery_check(target, map, batch), "moments.");
  return rep;
}

Report run_ma_verify(const Instance& inst, const SuiteConfig& cfg) {
  Report rep("ma-verify/" + inst.name);
  const LogConcaveDensity density = LogConcaveDensity::make(*inst.f, inst.alpha);
  const SolverOptions sopts = solver_options(cfg);
  const TransportSolution sol = solve_transport(density, sopts);
  const SampleBatch batch = sample(GaussianSpace{density.dim()}, cfg.samples,
                                   child_seed(cfg, 0x3A0));

  rep.metric("normalizer", density.c());
  rep.metric("h_convex", density.h_convex() ? 1.0 : 0.0);

  const MAReport ma =
      ma_residual(density, sol, batch, default_ma_tolerance(sol));
  rep.absorb(ma.report, "equation.");
  rep.absorb(subsolution_check(density, sol, batch, 1e-9), "subsolution.");
  rep.absorb(wasserstein_identity(density, sol, batch), "wasserstein.");
  rep.absorb(interpolation_bound(density, sol, batch), "interpolation.");
  rep.absorb(lipschitz_check(density, sol, batch), "contraction.");
  rep.absorb(cyclic_monotonicity_check(sol, batch, 64, child_seed(cfg, 0xC1C)),
             "monotone.");
  rep.absorb(exp_integrability_check(sol, batch, 0.1), "expmoment.");

  if (inst.name == "canonical-quadratic") {
    rep.add_eq("canonical_half_d2", rep.metric_value("wasserstein.half_wasserstein_sq"),
               0.125, 1e-12, "closed-form");
    rep.add_eq("canonical_entropy",
               rep.metric_value("wasserstein.relative_entropy"),
               std::log(2.0) - 0.375, 1e-12, "closed-form");
    rep.add_eq("canonical_det2_term",
               rep.metric_value("wasserstein.det2_term"), 0.5 - std::log(2.0),
               1e-12, "closed-form");
    // t = 3 leaves the integrability domain: 2 t max eig(N)^2 = 1.5 >= 1.
    Report diverging = exp_integrability_check(sol, batch, 3.0);
    rep.absorb(diverging, "expmoment_t3.");
    rep.add_flag("exp_moment_divergence_flagged",
                 diverging.find("exp_moment_divergent") != nullptr,
                 "t = 3 must sit outside the finiteness domain");
  }
  if (inst.expect_expansion) {
    const double expansion =
        std::max(rep.metric_value("contraction.gradient_lipschitz"),
                 rep.metric_value("contraction.map_contraction"));
    rep.add_ge("expansion_detected", expansion, 1.25, 0.0, "closed-form");
    const CheckResult* gate = rep.find("contraction.contraction_gate_informative");
    rep.add_flag("hypothesis_violation_reported", gate != nullptr,
                 gate != nullptr ? gate->note : "gate asserted despite expansion");
  }
  return rep;
}

Report run_dimlift(const Instance& inst, const SuiteConfig& cfg) {
  Report rep("dimlift/" + inst.name);
  const LogConcaveDensity density = LogConcaveDensity::make(*inst.f, inst.alpha);
  const int d = density.dim();
  std::vector<int> ns;
  for (int n = 1; n <= d; ++n) ns.push_back(n);

  const SampleBatch batch = sample(GaussianSpace{d}, cfg.samples,
                                   child_seed(cfg, 0xD1F7));
  const SolverOptions sopts = solver_options(cfg);

  rep.absorb(tower_property_check(density, ns), "tower.");
  rep.absorb(convergence_study(density, ns, batch, sopts).report,
             "convergence.");
  rep.absorb(hessian_bound_study(density, ns, batch, sopts), "hessian.");
  rep.absorb(talagrand_doubling_check(density, batch, sopts), "doubling.");

  for (int n : ns) {
    const Functional fn = condition_functional(*inst.f, n);
    double min_eig = 0.0;
    if (fn.kind() == Functional::Kind::Quadratic ||
        fn.kind() == Functional::Kind::Linear ||
        fn.kind() == Functional::Kind::Constant) {
      if (fn.kind() == Functional::Kind::Quadratic) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(fn.quadratic_data().S);
        min_eig = es.eigenvalues().minCoeff();
      }
    } else {
      const SampleBatch probe =
          sample(GaussianSpace{n}, 256, child_seed(cfg, 0x3E + n));
      min_eig = check_one_convex(fn, probe).min_eigenvalue;
    }
    if (density.h_convex()) {
      rep.add_ge("conditioned_convexity_n" + std::to_string(n), min_eig, 0.0,
                 1e-12, "closed-form");
    }
  }

  if (inst.name == "coupled-2d") {
    rep.add_eq("normalizer_closed_form", density.c(), kCoupledNormalizer,
               1e-12, "closed-form");
    // f_1(x) = (7/16) x^2 + log(2)/2, so the stored S = 2 * 7/16.
    const Functional f1 = condition_functional(*inst.f, 1);
    rep.add_eq("conditioned_curvature", f1.quadratic_data().S(0, 0), 0.875,
               1e-12, "closed-form");
    rep.add_eq("conditioned_offset", f1.value(VectorXd::Zero(1)),
               0.5 * std::log(2.0), 1e-12, "closed-form");
  }
  return rep;
}

Report run_ito_sim(const Instance& inst, const SuiteConfig& cfg) {
  Report rep("ito-sim/" + inst.name);
  const TimeGrid grid = TimeGrid::uniform(cfg.steps);
  Functional f_z = inst.path == Instance::Path::Linear
                       ? terminal_linear_z(grid, inst.path_param)
                       : terminal_quadratic_z(grid, inst.path_param);
  const double alpha = inst.path == Instance::Path::Linear ? kInf : 0.0;
  const PathTarget target = solve_path_transport(grid, f_z, alpha);
  const PathBatch batch =
      sample_paths(grid, cfg.paths, child_seed(cfg, 0x170));
  const GaussianDriftModel model = GaussianDriftModel::make(grid, f_z);

  const MatrixXd x = transported_increments(target, batch);
  const MatrixXd u = drift_along(model, grid, x);
  const MatrixXd brownian = extract_brownian_part(grid, x, u);
  rep.absorb(brownianity_check(grid, brownian), "brownian.");
  Report jac = ito_jacobian_check(target, model, batch, cfg.jacobian_bias_tol);
  rep.absorb(jac, "jacobian.");
  rep.absorb(path_rotation_check(target, batch, cfg.trials,
                                 child_seed(cfg, 0x907A)),
             "rotation.");
  rep.absorb(free_energy_check(target, model, batch), "energy.");

  rep.metric("free_energy", -target.density.log_c());
  if (inst.path == Instance::Path::Linear) {
    rep.add_le("linear_exact_jacobian",
               rep.metric_value("jacobian.max_log_error"), 1e-10, 0.0,
               "closed-form");
    const double recovery =
        (brownian - batch.increments).cwiseAbs().maxCoeff();
    rep.add_le("linear_brownian_recovery", recovery, 1e-12, 0.0,
               "closed-form");
    rep.add_eq("free_energy_closed_form", -target.density.log_c(),
               -0.5 * inst.path_param * inst.path_param, 1e-12, "closed-form");
  }
  if (inst.name == "quad-w1") {
    rep.add_eq("free_energy_closed_form", -target.density.log_c(),
               0.5 * std::log1p(inst.path_param), 1e-10, "closed-form");
  }
  return rep;
}

}  // namespace

SuiteConfig config_from_entries(
    const std::vector<std::pair<std::string, std::string>>& entries) {
  SuiteConfig cfg;
  for (const auto& [key, value] : entries) {
    try {
      if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "samples") {
        cfg.samples = std::stoi(value);
      } else if (key == "oracle_points") {
        cfg.oracle_points = std::stoi(value);
      } else if (key == "probes") {
        cfg.probes = std::stoi(value);
      } else if (key == "trials") {
        cfg.trials = std::stoi(value);
      } else if (key == "steps") {
        cfg.steps = std::stoi(value);
      } else if (key == "paths") {
        cfg.paths = std::stoi(value);
      } else if (key == "grid_points") {
        cfg.grid_points = std::stoi(value);
      } else if (key == "grid_range") {
        cfg.grid_range = std::stod(value);
      } else if (key == "jacobian_bias_tol") {
        cfg.jacobian_bias_tol = std::stod(value);
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("config key '" + key + "' has malformed value '" +
                        value + "'");
    } catch (const std::out_of_range&) {
      throw ConfigError("config key '" + key + "' has out-of-range value '" +
                        value + "'");
    }
  }
  if (cfg.samples < 2 || cfg.paths < 2 || cfg.steps < 1 ||
      cfg.grid_points < 16) {
    throw ConfigError("config sizes must be positive (samples/paths >= 2, "
                      "grid_points >= 16)");
  }
  return cfg;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "detcf", "polar", "gaussmap", "ma-verify", "dimlift", "ito-sim"};
  return names;
}

std::string suite_description(const std::string& suite) {
  if (suite == "detcf") {
    return "Carleman-Fredholm determinants and the Girsanov density of "
           "linear shifts";
  }
  if (suite == "polar") {
    return "polar factorization of I+K into a monotone stretch and a "
           "measure-preserving rotation, with a discrete assignment oracle";
  }
  if (suite == "gaussmap") {
    return "closed-form monotone maps onto Gaussian targets: characteristic "
           "function and covariance recovery";
  }
  if (suite == "ma-verify") {
    return "the log-domain Monge-Ampere equation: residuals, subsolution "
           "domination, Wasserstein identity, Talagrand and contraction "
           "gates";
  }
  if (suite == "dimlift") {
    return "finite-dimensional conditioning: tower property, gradient "
           "convergence, Hessian bounds, product doubling, exponential "
           "moments";
  }
  if (suite == "ito-sim") {
    return "path-space transport: drift extraction, Brownianity of the "
           "extracted part, the Ito form of the Jacobian, free energy";
  }
  throw ConfigError("unknown suite '" + suite + "'");
}

std::vector<InstanceInfo> instance_catalog() {
  std::vector<InstanceInfo> out;
  for (const auto& inst : build_instances()) {
    out.push_back({inst.name, inst.summary, inst.suites()});
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> plan_runs(
    const std::string& suite, const std::string& instance) {
  std::vector<std::string> suites;
  if (suite == "all") {
    suites = suite_names();
  } else {
    suite_description(suite);  // validates the name
    suites = {suite};
  }
  std::vector<std::pair<std::string, std::string>> plan;
  for (const auto& s : suites) {
    if (instance.empty()) {
      for (const auto& inst : build_instances()) {
        if (inst.supports(s)) plan.emplace_back(s, inst.name);
      }
    } else {
      const Instance inst = find_instance(instance);
      if (!inst.supports(s)) {
        if (suite == "all") continue;
        throw ConfigError("instance '" + instance +
                          "' is not registered for suite '" + s + "'");
      }
      plan.emplace_back(s, inst.name);
    }
  }
  if (plan.empty()) {
    throw ConfigError("no (suite, instance) pair matches the request");
  }
  return plan;
}

SuiteRun run_one(const std::string& suite, const std::string& instance,
                 const SuiteConfig& cfg) {
  const Instance inst = find_instance(instance);
  if (!inst.supports(suite)) {
    throw ConfigError("instance '" + instance +
                      "' is not registered for suite '" + suite + "'");
  }
  SuiteRun run;
  run.suite = suite;
  run.instance = instance;
  if (suite == "detcf") {
    run.report = run_detcf(inst, cfg);
  } else if (suite == "polar") {
    run.report = run_polar(inst, cfg);
  } else if (suite == "gaussmap") {
    run.report = run_gaussmap(inst, cfg);
  } else if (suite == "ma-verify") {
    run.report = run_ma_verify(inst, cfg);
  } else if (suite == "dimlift") {
    run.report = run_dimlift(inst, cfg);
  } else if (suite == "ito-sim") {
    run.report = run_ito_sim(inst, cfg);
  } else {
    throw ConfigError("unknown suite '" + suite + "'");
  }
  return run;
}

std::vector<SuiteRun> run_suites(const std::string& suite,
                                 const std::string& instance,
                                 const SuiteConfig& cfg) {
  std::vector<SuiteRun> out;
  for (const auto& [s, i] : plan_runs(suite, instance)) {
    out.push_back(run_one(s, i, cfg));
  }
  return out;
}

}  // namespace otlab
