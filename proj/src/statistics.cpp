#include "otlab/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace otlab {

namespace {

McEstimate mean_se_impl(const double* data, int n) {
  McEstimate est;
  est.count = n;
  if (n == 0) return est;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(data[i])) {
      throw NonFiniteValue("mean_se: non-finite value at index " + std::to_string(i));
    }
    sum += data[i];
  }
  est.mean = sum / n;
  if (n > 1) {
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = data[i] - est.mean;
      ss += d * d;
    }
    est.se = std::sqrt(ss / (static_cast<double>(n) - 1.0) / n);
  }
  return est;
}

}  // namespace

McEstimate mean_se(const std::vector<double>& values) {
  return mean_se_impl(values.data(), static_cast<int>(values.size()));
}

McEstimate mean_se(const Eigen::Ref<const VectorXd>& values) {
  return mean_se_impl(values.data(), static_cast<int>(values.size()));
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs((i + 1.0) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_critical(double alpha, double n, double m) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  if (m > 0.0) return c * std::sqrt((n + m) / (n * m));
  return c / std::sqrt(n);
}

double lag1_correlation(const MatrixXd& rows) {
  const int n = static_cast<int>(rows.rows());
  const int m = static_cast<int>(rows.cols());
  if (m < 2) return 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  const double cnt = static_cast<double>(n) * (m - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j + 1 < m; ++j) {
      const double x = rows(i, j);
      const double y = rows(i, j + 1);
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
  }
  const double cov = sxy / cnt - (sx / cnt) * (sy / cnt);
  const double vx = sxx / cnt - (sx / cnt) * (sx / cnt);
  const double vy = syy / cnt - (sy / cnt) * (sy / cnt);
  return cov / std::sqrt(vx * vy);
}

}  // namespace otlab
