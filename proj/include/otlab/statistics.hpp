#pragma once

#include <functional>
#include <vector>

#include "otlab/types.hpp"

namespace otlab {

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  int count = 0;
};

// Mean and standard error with summation in index order (deterministic).
McEstimate mean_se(const std::vector<double>& values);
McEstimate mean_se(const Eigen::Ref<const VectorXd>& values);

// One-sample Kolmogorov-Smirnov distance against a CDF.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

// Critical value c(alpha) * sqrt((n+m)/(n*m)) for the two-sample test; for the
// one-sample test pass m = infinity by using ks_critical(alpha, n).
double ks_critical(double alpha, double n, double m = 0.0);

// Pooled lag-1 autocorrelation of rows (each row a series of increments).
double lag1_correlation(const MatrixXd& rows);

}  // namespace otlab
