#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "otlab/ito.hpp"

using namespace otlab;

TEST_CASE("time grid partitions the unit interval") {
  const TimeGrid grid = TimeGrid::uniform(8);
  CHECK(grid.steps() == 8);
  CHECK(grid.times(0) == doctest::Approx(0.0));
  CHECK(grid.times(8) == doctest::Approx(1.0));
  CHECK(grid.dt(3) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(grid.sqrt_dts()(0) == doctest::Approx(std::sqrt(0.125)).epsilon(1e-15));
}

TEST_CASE("path sampling is reproducible and per entry addressed") {
  const TimeGrid grid = TimeGrid::uniform(16);
  const PathBatch a = sample_paths(grid, 50, 7);
  const PathBatch b = sample_paths(grid, 25, 7);
  CHECK((a.increments.topRows(25) - b.increments).cwiseAbs().maxCoeff() ==
        0.0);
  const PathBatch c = sample_paths(grid, 50, 8);
  CHECK((a.increments - c.increments).cwiseAbs().maxCoeff() > 0.0);

  // normalized increments have the right empirical scale
  const MatrixXd z = to_z(a);
  CHECK(z.rows() == 50);
  CHECK(z.cols() == 16);
  const MatrixXd W = cumulative(grid, a.increments);
  CHECK(W.cols() == 17);
  CHECK(W.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(W(3, 16) - a.increments.row(3).sum()) < 1e-14);
}

TEST_CASE("terminal functionals in z coordinates") {
  const TimeGrid grid = TimeGrid::uniform(4);
  const Functional lin = terminal_linear_z(grid, 2.0);
  const Functional quad = terminal_quadratic_z(grid, 3.0);
  VectorXd z(4);
  z << 1.0, -0.5, 0.25, 0.5;
  const double w1 = 0.5 * (1.0 - 0.5 + 0.25 + 0.5);  // sqrt(dt) = 1/2
  CHECK(lin.value(z) == doctest::Approx(2.0 * w1).epsilon(1e-14));
  CHECK(quad.value(z) == doctest::Approx(1.5 * w1 * w1).epsilon(1e-14));
}

TEST_CASE("linear terminal drift is constant and exact") {
  const TimeGrid grid = TimeGrid::uniform(32);
  const Functional f = terminal_linear_z(grid, 1.0);
  const PathTarget target = solve_path_transport(
      grid, f, std::numeric_limits<double>::infinity());
  const GaussianDriftModel model = GaussianDriftModel::make(grid, f);

  // u = -a at every node regardless of history
  for (int k = 0; k <= 32; ++k) {
    const VectorXd prefix = VectorXd::Zero(k);
    CHECK(model.at(k, prefix) == doctest::Approx(-1.0).epsilon(1e-12));
  }

  const PathBatch batch = sample_paths(grid, 2000, 31);
  const MatrixXd inc = transported_increments(target, batch);
  const MatrixXd drift = drift_along(model, grid, inc);
  const MatrixXd brown = extract_brownian_part(grid, inc, drift);
  // X = W - t exactly, so the recovered part equals the driving increments
  CHECK((brown - batch.increments).cwiseAbs().maxCoeff() < 1e-12);

  const Report jac = ito_jacobian_check(target, model, batch, 1e-10);
  CHECK(jac.passed());
  CHECK(jac.metric_value("max_log_error") <= 1e-10);

  const Report fe = free_energy_check(target, model, batch);
  CHECK(fe.passed());
  CHECK(fe.metric_value("free_energy") == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("quadratic terminal drift matches the continuum formula") {
  const double s = 3.0;
  const TimeGrid grid = TimeGrid::uniform(64);
  const Functional f = terminal_quadratic_z(grid, s);
  const GaussianDriftModel model = GaussianDriftModel::make(grid, f);

  // u(t, w) = -s w / (1 + s (1 - t)) for f = s W_1^2 / 2
  const CounterRng rng(5);
  for (const int k : {0, 1, 13, 40, 63}) {
    VectorXd prefix(k);
    double w = 0.0;
    for (int j = 0; j < k; ++j) {
      prefix(j) = rng.normal(static_cast<std::uint64_t>(k), j);
      w += prefix(j) * std::sqrt(grid.dt(j));
    }
    const double t = grid.times(k);
    const double expected = -s * w / (1.0 + s * (1.0 - t));
    CHECK(model.at(k, prefix) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("importance sampled drift agrees with the gaussian model") {
  const TimeGrid grid = TimeGrid::uniform(16);
  const Functional f = terminal_quadratic_z(grid, 3.0);
  const GaussianDriftModel model = GaussianDriftModel::make(grid, f);
  VectorXd prefix(4);
  prefix << 0.8, -0.3, 1.1, 0.2;
  const double exact = model.at(4, prefix);
  const double mc = mc_drift(f, grid, 4, prefix, 200000, 77);
  CHECK(std::abs(mc - exact) < 0.05 * std::max(1.0, std::abs(exact)));

  // a steep linear tilt starves the effective sample size
  const Functional steep = terminal_linear_z(grid, 60.0);
  CHECK_THROWS_AS((void)mc_drift(steep, grid, 4, prefix, 200, 78),
                  DegenerateWeights);
}

TEST_CASE("brownianity of raw increments") {
  const TimeGrid grid = TimeGrid::uniform(32);
  const PathBatch batch = sample_paths(grid, 20000, 92);
  CHECK(brownianity_check(grid, batch.increments).passed());

  // a visible drift must fail the mean test
  MatrixXd shifted = batch.increments;
  shifted.array() += 0.05;
  CHECK_FALSE(brownianity_check(grid, shifted).passed());
}

TEST_CASE("quadratic free energy decomposition") {
  const double s = 3.0;
  const TimeGrid grid = TimeGrid::uniform(64);
  const Functional f = terminal_quadratic_z(grid, s);
  const PathTarget target = solve_path_transport(grid, f, 0.0);
  // -log c = log(1 + s)/2 for the terminal quadratic
  CHECK(-target.density.log_c() ==
        doctest::Approx(0.5 * std::log1p(s)).epsilon(1e-12));
  const GaussianDriftModel model = GaussianDriftModel::make(grid, f);
  const PathBatch batch = sample_paths(grid, 20000, 93);
  const Report fe = free_energy_check(target, model, batch);
  CHECK(fe.passed());
  CHECK(fe.metric_value("free_energy") ==
        doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("rotation invariance of the path law") {
  const TimeGrid grid = TimeGrid::uniform(12);
  const Functional f = terminal_quadratic_z(grid, 3.0);
  const PathTarget target = solve_path_transport(grid, f, 0.0);
  const PathBatch batch = sample_paths(grid, 8000, 94);
  CHECK(path_rotation_check(target, batch, 6, 95).passed());
}

TEST_CASE("jacobian bias shrinks with the step count") {
  const double s = 3.0;
  const PathBatch coarse = sample_paths(TimeGrid::uniform(16), 20000, 96);
  const PathBatch fine = sample_paths(TimeGrid::uniform(32), 20000, 96);
  double biases[2];
  int slot = 0;
  for (const PathBatch* batch : {&coarse, &fine}) {
    const TimeGrid& grid = batch->grid;
    const Functional f = terminal_quadratic_z(grid, s);
    const PathTarget target = solve_path_transport(grid, f, 0.0);
    const GaussianDriftModel model = GaussianDriftModel::make(grid, f);
    const Report rep = ito_jacobian_check(target, model, *batch, 0.2);
    CHECK(rep.passed());
    const CheckResult* bias = rep.find("reconstruction_bias");
    REQUIRE(bias != nullptr);
    biases[slot++] = std::abs(bias->value);
  }
  CHECK(biases[1] < biases[0]);
}
