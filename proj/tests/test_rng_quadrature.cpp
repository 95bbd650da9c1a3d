#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "otlab/quadrature.hpp"
#include "otlab/rng.hpp"
#include "otlab/statistics.hpp"

using namespace otlab;

TEST_CASE("philox words are reproducible and seed-sensitive") {
  const auto a = philox4x32(42, {1, 2, 3, 4});
  const auto b = philox4x32(42, {1, 2, 3, 4});
  const auto c = philox4x32(43, {1, 2, 3, 4});
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("counter rng draws depend only on (seed, stream, index)") {
  const CounterRng rng(7);
  const double x = rng.normal(5, 1000);
  // interleaved access in any order reproduces the same value
  (void)rng.normal(5, 999);
  (void)rng.normal(6, 1000);
  CHECK(rng.normal(5, 1000) == x);
  CHECK(CounterRng(8).normal(5, 1000) != x);
  CHECK(CounterRng::derive(7, 1) != CounterRng::derive(7, 2));
  CHECK(CounterRng::derive(7, 1, 1) != CounterRng::derive(7, 1, 2));
}

TEST_CASE("uniforms live in (0,1), normals match moments") {
  const CounterRng rng(123);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform(0, i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal(1, i);
    sum += z;
    sum2 += z * z;
    sum4 += z * z * z * z;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(sum4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1.0 - 1e-9}) {
    const double x = standard_normal_quantile(p);
    CHECK(standard_normal_cdf(x) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(std::abs(standard_normal_quantile(0.5)) < 1e-15);
  CHECK(standard_normal_pdf(0.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-15));
}

TEST_CASE("adaptive integration reproduces closed forms") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0) ==
        doctest::Approx(9.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
        doctest::Approx(2.0).epsilon(1e-13));
  // GK15 integrates degree <= 22 exactly on one panel; degree 9 must be flat
  CHECK(integrate([](double x) { return 10.0 * std::pow(x, 9); }, -1.0, 2.0) ==
        doctest::Approx(1024.0 - 1.0).epsilon(1e-13));
  // narrow spike forces adaptivity
  CHECK(integrate([](double x) { return std::exp(-1e4 * x * x); }, -1.0, 1.0) ==
        doctest::Approx(std::sqrt(M_PI) / 100.0).epsilon(1e-10));
}

TEST_CASE("gaussian expectation matches moment formulas") {
  CHECK(gaussian_expectation([](double) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(gaussian_expectation([](double x) { return x * x; }) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(gaussian_expectation([](double x) { return x * x * x * x; }) ==
        doctest::Approx(3.0).epsilon(1e-11));
  // E[exp(-3/2 x^2)] = 1/2 and E[exp(x)] = e^{1/2}, both frozen
  CHECK(gaussian_expectation(
            [](double x) { return std::exp(-1.5 * x * x); }) ==
        doctest::Approx(0.5).epsilon(1e-13));
  CHECK(gaussian_expectation([](double x) { return std::exp(x); }) ==
        doctest::Approx(1.6487212707001282).epsilon(1e-11));
}

TEST_CASE("gauss hermite rule integrates polynomials exactly") {
  const HermiteRule rule = gauss_hermite(8);
  REQUIRE(rule.nodes.size() == 8);
  double w = 0.0, m2 = 0.0, m6 = 0.0;
  for (int i = 0; i < 8; ++i) {
    w += rule.weights(i);
    m2 += rule.weights(i) * rule.nodes(i) * rule.nodes(i);
    m6 += rule.weights(i) * std::pow(rule.nodes(i), 6);
  }
  // physicists' weight: total mass sqrt(pi), x^2 moment sqrt(pi)/2,
  // x^6 moment 15 sqrt(pi)/8
  CHECK(w == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-12));
  CHECK(m6 == doctest::Approx(15.0 * std::sqrt(M_PI) / 8.0).epsilon(1e-12));

  CHECK(gauss_hermite_expectation([](double x) { return x * x * x * x; }, 32) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(gauss_hermite_expectation(
            [](double x) { return std::exp(-1.5 * x * x); }, 64) ==
        doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("ks statistics behave on known samples") {
  std::vector<double> unif;
  const CounterRng rng(9);
  for (int i = 0; i < 5000; ++i) unif.push_back(rng.uniform(0, i));
  const double d =
      ks_distance(unif, [](double x) { return std::min(1.0, std::max(0.0, x)); });
  CHECK(d < ks_critical(1e-3, 5000.0));

  std::vector<double> a, b;
  for (int i = 0; i < 4000; ++i) {
    a.push_back(rng.normal(1, i));
    b.push_back(rng.normal(2, i));
  }
  CHECK(ks_distance_two_sample(a, b) < ks_critical(1e-3, 4000.0, 4000.0));
  // shifted sample must be detected
  std::vector<double> c;
  for (int i = 0; i < 4000; ++i) c.push_back(rng.normal(3, i) + 0.5);
  CHECK(ks_distance_two_sample(a, c) > ks_critical(1e-3, 4000.0, 4000.0));
}

TEST_CASE("mean_se and lag1 are deterministic and sane") {
  std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const McEstimate est = mean_se(v);
  CHECK(est.mean == doctest::Approx(2.5));
  CHECK(est.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(est.count == 4);

  MatrixXd rows(2, 4);
  rows << 1, -1, 1, -1, 1, -1, 1, -1;
  CHECK(lag1_correlation(rows) == doctest::Approx(-1.0).epsilon(1e-12));
}
