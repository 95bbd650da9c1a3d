#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "otlab/monge_ampere.hpp"
#include "otlab/quadrature.hpp"
#include "otlab/rng.hpp"

using namespace otlab;

namespace {

LogConcaveDensity canonical_density() {
  return LogConcaveDensity::make(
      Functional::quadratic(3.0 * MatrixXd::Identity(1, 1), VectorXd::Zero(1))
          .with_convexity_lower_bound(3.0),
      0.0);
}

LogConcaveDensity quartic_density() {
  ScalarFunction part{
      [](double t) { return 0.25 * t * t * t * t; },
      [](double t) { return t * t * t; },
      [](double t) { return 3.0 * t * t; },
  };
  return LogConcaveDensity::make(Functional::separable({part}), 0.0);
}

}  // namespace

TEST_CASE("canonical quadratic target solves in closed form") {
  const LogConcaveDensity density = canonical_density();
  CHECK(density.method() == NormalizationMethod::ClosedFormQuadratic);
  CHECK(density.log_c() == doctest::Approx(-std::log(2.0)).epsilon(1e-14));
  CHECK(density.h_convex());

  const TransportSolution sol = solve_transport(density);
  const auto* quad = sol.as_quadratic();
  REQUIRE(quad != nullptr);
  CHECK(quad->N(0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(quad->shift(0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(det2(HSPerturbation::make_symmetric(quad->N)) ==
        doctest::Approx(0.8243606353500641).epsilon(1e-14));

  const SampleBatch batch = sample(GaussianSpace{1}, 1000, 5);
  const MAReport mar = ma_residual(density, sol, batch, 1e-8);
  CHECK(mar.report.passed());
  CHECK(mar.max_relative_residual <= 1e-8);
}

TEST_CASE("wasserstein identity closed form for the canonical instance") {
  const LogConcaveDensity density = canonical_density();
  const TransportSolution sol = solve_transport(density);
  const SampleBatch batch = sample(GaussianSpace{1}, 4000, 6);
  const Report rep = wasserstein_identity(density, sol, batch);
  CHECK(rep.passed());
  CHECK(rep.metric_value("half_wasserstein_sq") ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(rep.metric_value("relative_entropy") ==
        doctest::Approx(std::log(2.0) - 0.375).epsilon(1e-12));
  CHECK(rep.metric_value("det2_term") ==
        doctest::Approx(0.5 - std::log(2.0)).epsilon(1e-12));
  // Talagrand: d^2 = 0.25 <= 2 * 0.3181... = 0.6362943611198906
  const CheckResult* tal = rep.find("talagrand_inequality");
  REQUIRE(tal != nullptr);
  CHECK(tal->value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(tal->bound == doctest::Approx(0.6362943611198906).epsilon(1e-12));
}

TEST_CASE("linear tilt is an exact translation") {
  const LogConcaveDensity density =
      LogConcaveDensity::make(Functional::linear(VectorXd::Ones(1)),
                              std::numeric_limits<double>::infinity());
  CHECK(density.log_c() == doctest::Approx(0.5).epsilon(1e-14));
  const TransportSolution sol = solve_transport(density);
  VectorXd x(1);
  x << 0.7;
  CHECK(sol.map(x)(0) == doctest::Approx(-0.3).epsilon(1e-14));
  CHECK(sol.grad_phi(x)(0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(sol.hessian_phi(x)(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("tabulated 1d map matches an independent cdf oracle") {
  const LogConcaveDensity density = quartic_density();
  const TransportSolution sol = solve_transport(density);

  // Independent oracle: the monotone map must equate distribution functions,
  // Phi(x) = F_target(T(x)), with F_target integrated directly.
  const double norm = density.c() * std::sqrt(2.0 * std::numbers::pi);
  const auto target_pdf = [&](double t) {
    return std::exp(-0.5 * t * t - 0.25 * t * t * t * t) / norm;
  };
  QuadratureOptions qopts;
  for (const double x : {-2.5, -1.4, -0.6, 0.0, 0.3, 1.1, 2.2}) {
    VectorXd xv(1);
    xv << x;
    const double Tx = sol.map(xv)(0);
    const double F = integrate(target_pdf, -kGaussianRange, Tx, qopts);
    CHECK(std::abs(F - standard_normal_cdf(x)) < 1e-7);
    CHECK(sol.inverse(sol.map(xv))(0) == doctest::Approx(x).epsilon(1e-9));
  }

  const SampleBatch batch = sample(GaussianSpace{1}, 2000, 7);
  const MAReport mar =
      ma_residual(density, sol, batch, default_ma_tolerance(sol));
  CHECK(mar.report.passed());
  CHECK(wasserstein_identity(density, sol, batch).passed());
}

TEST_CASE("separable two dimensional solve") {
  ScalarFunction quartic{
      [](double t) { return 0.25 * t * t * t * t; },
      [](double t) { return t * t * t; },
      [](double t) { return 3.0 * t * t; },
  };
  ScalarFunction quad{
      [](double t) { return 1.5 * t * t; },
      [](double t) { return 3.0 * t; },
      [](double) { return 3.0; },
  };
  const LogConcaveDensity density =
      LogConcaveDensity::make(Functional::separable({quartic, quad}), 0.0);
  const TransportSolution sol = solve_transport(density);
  REQUIRE(sol.as_coords() != nullptr);

  const SampleBatch batch = sample(GaussianSpace{2}, 2000, 8);
  const MAReport mar =
      ma_residual(density, sol, batch, default_ma_tolerance(sol));
  CHECK(mar.report.passed());
  // Second coordinate is the closed-form shrink x -> x/2.
  VectorXd x(2);
  x << 0.0, 1.0;
  CHECK(sol.map(x)(1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("default tolerance depends on representation") {
  const TransportSolution quad =
      solve_transport(canonical_density());
  CHECK(default_ma_tolerance(quad) == doctest::Approx(1e-6));
  const TransportSolution tab = solve_transport(quartic_density());
  CHECK(default_ma_tolerance(tab) == doctest::Approx(1e-4));
}

TEST_CASE("subsolution domination on the canonical instance") {
  const LogConcaveDensity density = canonical_density();
  const TransportSolution sol = solve_transport(density);
  const SampleBatch batch = sample(GaussianSpace{1}, 40000, 9);
  const Report rep = subsolution_check(density, sol, batch, 1e-6);
  CHECK(rep.passed());
  // All five test functions must be present.
  for (const char* name :
       {"mean_domination_unit", "mean_domination_bump",
        "mean_domination_cauchy", "mean_domination_cosine",
        "mean_domination_energy"}) {
    CHECK(rep.find(name) != nullptr);
  }
}

TEST_CASE("contraction gate reports the expanding counterexample") {
  const LogConcaveDensity density = LogConcaveDensity::make(
      Functional::quadratic(-0.75 * MatrixXd::Identity(1, 1),
                            VectorXd::Zero(1), 0.5 * std::log(4.0)),
      std::numeric_limits<double>::infinity());
  CHECK_FALSE(density.h_convex());
  const TransportSolution sol = solve_transport(density);
  const SampleBatch batch = sample(GaussianSpace{1}, 2000, 10);
  const Report rep = lipschitz_check(density, sol, batch);
  // Constants are reported but not asserted: the hypothesis fails.
  CHECK(rep.passed());
  CHECK(rep.find("contraction_gate_informative") != nullptr);
  CHECK(rep.metric_value("map_contraction") ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rep.metric_value("gradient_lipschitz") ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("contraction gate asserts on convex targets") {
  const LogConcaveDensity density = canonical_density();
  const TransportSolution sol = solve_transport(density);
  const SampleBatch batch = sample(GaussianSpace{1}, 2000, 11);
  const Report rep = lipschitz_check(density, sol, batch);
  CHECK(rep.passed());
  CHECK(rep.find("gradient_lipschitz_bound") != nullptr);
  CHECK(rep.metric_value("gradient_lipschitz") <= 1.0 + 1e-12);
}

TEST_CASE("interpolation bound needs a finite lower bound") {
  const LogConcaveDensity density = canonical_density();
  const TransportSolution sol = solve_transport(density);
  const SampleBatch batch = sample(GaussianSpace{1}, 2000, 12);
  CHECK(interpolation_bound(density, sol, batch).passed());

  const LogConcaveDensity tilt =
      LogConcaveDensity::make(Functional::linear(VectorXd::Ones(1)),
                              std::numeric_limits<double>::infinity());
  const Report rep = interpolation_bound(tilt, solve_transport(tilt), batch);
  CHECK(rep.find("interpolation_bound_inapplicable") != nullptr);
}

TEST_CASE("cyclic monotonicity of the canonical map") {
  const LogConcaveDensity density = quartic_density();
  const TransportSolution sol = solve_transport(density);
  const SampleBatch batch = sample(GaussianSpace{1}, 512, 13);
  CHECK(cyclic_monotonicity_check(sol, batch, 64, 77).passed());
}

TEST_CASE("gaussian divergence of a linear field is the second chaos") {
  MatrixXd K(2, 2);
  K << 0.2, -0.3, 0.4, 0.1;
  const VectorField xi = linear_field(K);
  VectorXd x(2);
  x << 1.3, -0.8;
  CHECK(gaussian_divergence(xi, x) ==
        doctest::Approx(second_chaos(K, x)).epsilon(1e-13));
}

TEST_CASE("divergence composition rule") {
  const VectorField xi{
      2,
      [](const VectorXd& x) {
        VectorXd v(2);
        v << x(0) * x(0), x(0) * x(1);
        return v;
      },
      [](const VectorXd& x) {
        MatrixXd J(2, 2);
        J << 2.0 * x(0), 0.0, x(1), x(0);
        return J;
      },
  };
  MatrixXd M(2, 2);
  M << 0.3, 0.1, -0.2, 0.4;
  const VectorField u = linear_field(M);
  const SampleBatch batch = sample(GaussianSpace{2}, 128, 14);
  const Report rep = divergence_composition_check(xi, u, batch);
  CHECK(rep.passed());
  const CheckResult* id = rep.find("composition_identity");
  REQUIRE(id != nullptr);
  CHECK(id->value <= 1e-10);
}

TEST_CASE("non separable custom targets are out of reach") {
  const Functional f = Functional::custom(
      2,
      [](const VectorXd& x) { return 0.1 * x(0) * x(0) * x(1) * x(1); },
      [](const VectorXd& x) {
        VectorXd g(2);
        g << 0.2 * x(0) * x(1) * x(1), 0.2 * x(0) * x(0) * x(1);
        return g;
      });
  const LogConcaveDensity density =
      LogConcaveDensity::make_mc(f, 0.0, 4000, 15);
  CHECK_THROWS_AS((void)solve_transport(density), UnsolvableRegime);
}
