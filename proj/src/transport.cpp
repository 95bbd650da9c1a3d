#include "otlab/transport.hpp"

#include <cmath>
#include <limits>

namespace otlab {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727418;
constexpr std::uint64_t kAuditSeed = 0xA0D17ull;

double log_normal_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

}  // namespace

const char* to_string(NormalizationMethod m) {
  switch (m) {
    case NormalizationMethod::ClosedFormQuadratic:
      return "closed-form-quadratic";
    case NormalizationMethod::Quadrature:
      return "quadrature";
    case NormalizationMethod::SeparableQuadrature:
      return "separable-quadrature";
    case NormalizationMethod::GaussHermite:
      return "gauss-hermite";
    case NormalizationMethod::MonteCarlo:
      return "monte-carlo";
  }
  return "unknown";
}

LogConcaveDensity LogConcaveDensity::make(Functional f, double alpha) {
  LogConcaveDensity d;
  d.f_ = std::move(f);
  d.alpha_ = alpha;
  switch (d.f_.kind()) {
    case Functional::Kind::Constant: {
      d.log_c_ = -d.f_.value(VectorXd::Zero(d.dim()));
      d.method_ = NormalizationMethod::ClosedFormQuadratic;
      break;
    }
    case Functional::Kind::Linear: {
      const VectorXd g = d.f_.gradient(VectorXd::Zero(d.dim()));
      d.log_c_ = -d.f_.value(VectorXd::Zero(d.dim())) + 0.5 * g.squaredNorm();
      d.method_ = NormalizationMethod::ClosedFormQuadratic;
      break;
    }
    case Functional::Kind::Quadratic: {
      const auto& q = d.f_.quadratic_data();
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(q.S);
      double log_det = 0.0;
      for (int i = 0; i < d.dim(); ++i) {
        const double one_plus = 1.0 + es.eigenvalues()[i];
        if (one_plus <= 1e-12) {
          throw NonIntegrableDensity(
              "LogConcaveDensity: exp(-f) not integrable, I + hess f not positive");
        }
        log_det += std::log(one_plus);
      }
      const VectorXd w = es.eigenvectors().transpose() * q.h;
      double corr = 0.0;
      for (int i = 0; i < d.dim(); ++i) {
        corr += w[i] * w[i] / (1.0 + es.eigenvalues()[i]);
      }
      d.log_c_ = -q.c - 0.5 * log_det + 0.5 * corr;
      d.method_ = NormalizationMethod::ClosedFormQuadratic;
      break;
    }
    case Functional::Kind::Separable: {
      double acc = 0.0;
      for (const auto& part : d.f_.separable_parts()) {
        const double ci =
            gaussian_expectation([&](double t) { return std::exp(-part.f(t)); });
        if (!(ci > 0.0) || !std::isfinite(ci)) {
          throw NonIntegrableDensity("LogConcaveDensity: coordinate integral failed");
        }
        acc += std::log(ci);
      }
      d.log_c_ = acc;
      d.method_ = NormalizationMethod::SeparableQuadrature;
      break;
    }
    case Functional::Kind::Custom: {
      if (d.dim() != 1) {
        throw ConfigError(
            "LogConcaveDensity::make: custom multi-dimensional f needs "
            "make_mc or make_gauss_hermite");
      }
      VectorXd x(1);
      const double ci = gaussian_expectation([&](double t) {
        x[0] = t;
        return std::exp(-d.f_.value(x));
      });
      if (!(ci > 0.0) || !std::isfinite(ci)) {
        throw NonIntegrableDensity("LogConcaveDensity: normalization failed");
      }
      d.log_c_ = std::log(ci);
      d.method_ = NormalizationMethod::Quadrature;
      break;
    }
  }
  d.c_ = std::exp(d.log_c_);
  d.audit();
  return d;
}

LogConcaveDensity LogConcaveDensity::make_mc(Functional f, double alpha, int count,
                                             std::uint64_t seed) {
  LogConcaveDensity d;
  d.f_ = std::move(f);
  d.alpha_ = alpha;
  const SampleBatch batch = sample(GaussianSpace{d.dim()}, count, seed);
  VectorXd neg_f(count);
  for (int i = 0; i < count; ++i) {
    neg_f[i] = -d.f_.value(batch.points.row(i));
  }
  const double m = neg_f.maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < count; ++i) acc += std::exp(neg_f[i] - m);
  d.log_c_ = m + std::log(acc / count);
  d.c_ = std::exp(d.log_c_);
  d.method_ = NormalizationMethod::MonteCarlo;
  d.audit();
  return d;
}

LogConcaveDensity LogConcaveDensity::make_gauss_hermite(Functional f, double alpha,
                                                        int order) {
  LogConcaveDensity d;
  d.f_ = std::move(f);
  d.alpha_ = alpha;
  const int n = d.dim();
  if (n > 3) {
    throw TooManyIntegratedDims(
        "LogConcaveDensity::make_gauss_hermite: more than 3 dimensions");
  }
  const HermiteRule rule = gauss_hermite(order);
  const double inv_sqrt_pi = 0.5641895835477562869;
  std::vector<int> idx(n, 0);
  double acc = 0.0;
  VectorXd x(n);
  while (true) {
    double w = 1.0;
    for (int k = 0; k < n; ++k) {
      w *= rule.weights[idx[k]] * inv_sqrt_pi;
      x[k] = M_SQRT2 * rule.nodes[idx[k]];
    }
    acc += w * std::exp(-d.f_.value(x));
    int k = 0;
    while (k < n && ++idx[k] == order) idx[k++] = 0;
    if (k == n) break;
  }
  if (!(acc > 0.0) || !std::isfinite(acc)) {
    throw NonIntegrableDensity("LogConcaveDensity: Gauss-Hermite normalization failed");
  }
  d.log_c_ = std::log(acc);
  d.c_ = acc;
  d.method_ = NormalizationMethod::GaussHermite;
  d.audit();
  return d;
}

void LogConcaveDensity::audit() {
  const SampleBatch probes = sample(GaussianSpace{dim()}, 256, kAuditSeed);
  const ConvexityReport conv = check_one_convex(f_, probes);
  min_hessian_eig_ = conv.min_eigenvalue;
  h_convex_ = conv.h_convex;
  if (!std::isfinite(alpha_)) {
    lower_bound_ok_ = false;
    return;
  }
  lower_bound_ok_ = true;
  for (int i = 0; i < probes.count(); ++i) {
    if (f_.value(probes.points.row(i)) < -alpha_ - 1e-9) {
      lower_bound_ok_ = false;
      break;
    }
  }
}

double LogConcaveDensity::density(const VectorXd& x) const {
  return std::exp(log_density(x));
}

double LogConcaveDensity::log_density(const VectorXd& x) const {
  return -f_.value(x) - log_c_;
}

Monotone1D::Monotone1D(VectorXd xs, VectorXd Ts, VectorXd dTs,
                       std::function<double(double)> target_log_pdf)
    : xs_(std::move(xs)),
      Ts_(std::move(Ts)),
      dTs_(std::move(dTs)),
      target_log_pdf_(std::move(target_log_pdf)) {
  const int n = static_cast<int>(xs_.size());
  if (n < 2 || Ts_.size() != n || dTs_.size() != n) {
    throw DimensionMismatch("Monotone1D: table sizes disagree");
  }
  h_ = xs_[1] - xs_[0];
  for (int i = 0; i + 1 < n; ++i) {
    if (!(xs_[i + 1] - xs_[i] > 0.0) ||
        std::abs(xs_[i + 1] - xs_[i] - h_) > 1e-9 * h_) {
      throw DimensionMismatch("Monotone1D: grid must be uniform increasing");
    }
    if (!(Ts_[i + 1] > Ts_[i])) {
      throw NonMonotoneInterpolant("Monotone1D: map values not increasing");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!(dTs_[i] > 0.0)) {
      throw NonMonotoneInterpolant("Monotone1D: nonpositive slope in table");
    }
  }
  // Fritsch-Carlson limiter: keeps each cubic piece monotone.  With accurate
  // slope data on a fine grid this is a no-op.
  for (int i = 0; i + 1 < n; ++i) {
    const double delta = (Ts_[i + 1] - Ts_[i]) / h_;
    const double a = dTs_[i] / delta;
    const double b = dTs_[i + 1] / delta;
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      dTs_[i] *= tau;
      dTs_[i + 1] *= tau;
    }
  }
  phis_.resize(n);
  phis_[0] = 0.0;
  double carry = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    // Exact integral of the cubic piece minus the identity part.
    const double intT = 0.5 * h_ * (Ts_[i] + Ts_[i + 1]) +
                        h_ * h_ * (dTs_[i] - dTs_[i + 1]) / 12.0;
    const double intId = 0.5 * (xs_[i + 1] * xs_[i + 1] - xs_[i] * xs_[i]);
    const double term = intT - intId;
    const double y = term - carry;
    const double t = phis_[i] + y;
    carry = (t - phis_[i]) - y;
    phis_[i + 1] = t;
  }
  // Anchor phi(0) = 0.
  phi0_ = 0.0;
  phi0_ = phi(0.0);
}

int Monotone1D::cell_of(double x) const {
  const int n = static_cast<int>(xs_.size());
  int i = static_cast<int>(std::floor((x - xs_[0]) / h_));
  if (i < 0) i = 0;
  if (i > n - 2) i = n - 2;
  return i;
}

double Monotone1D::eval_cell(int i, double x) const {
  const double t = (x - xs_[i]) / h_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * Ts_[i] + h10 * h_ * dTs_[i] + h01 * Ts_[i + 1] + h11 * h_ * dTs_[i + 1];
}

double Monotone1D::integral_cell(int i, double x) const {
  const double t = (x - xs_[i]) / h_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double H00 = 0.5 * t4 - t3 + t;
  const double H10 = 0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2;
  const double H01 = -0.5 * t4 + t3;
  const double H11 = 0.25 * t4 - t3 / 3.0;
  return h_ * (H00 * Ts_[i] + H10 * h_ * dTs_[i] + H01 * Ts_[i + 1] +
               H11 * h_ * dTs_[i + 1]);
}

double Monotone1D::map(double x) const {
  const int n = static_cast<int>(xs_.size());
  if (x <= xs_[0]) return Ts_[0] + dTs_[0] * (x - xs_[0]);
  if (x >= xs_[n - 1]) return Ts_[n - 1] + dTs_[n - 1] * (x - xs_[n - 1]);
  return eval_cell(cell_of(x), x);
}

double Monotone1D::deriv(double x) const {
  return std::exp(log_normal_pdf(x) - target_log_pdf_(map(x)));
}

double Monotone1D::inverse(double y) const {
  const int n = static_cast<int>(xs_.size());
  if (y <= Ts_[0]) return xs_[0] + (y - Ts_[0]) / dTs_[0];
  if (y >= Ts_[n - 1]) return xs_[n - 1] + (y - Ts_[n - 1]) / dTs_[n - 1];
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (Ts_[mid] <= y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double a = xs_[lo], b = xs_[lo + 1];
  double x = 0.5 * (a + b);
  for (int it = 0; it < 100; ++it) {
    const double err = eval_cell(lo, x) - y;
    if (err > 0.0) {
      b = x;
    } else {
      a = x;
    }
    const double d = deriv(x);
    double next = x - err / d;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - x) < 1e-14 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  return x;
}

double Monotone1D::phi(double x) const {
  const int n = static_cast<int>(xs_.size());
  double raw;
  if (x <= xs_[0]) {
    const double d = x - xs_[0];
    raw = Ts_[0] * d + 0.5 * dTs_[0] * d * d -
          0.5 * (x * x - xs_[0] * xs_[0]);
  } else if (x >= xs_[n - 1]) {
    const double d = x - xs_[n - 1];
    raw = phis_[n - 1] + Ts_[n - 1] * d + 0.5 * dTs_[n - 1] * d * d -
          0.5 * (x * x - xs_[n - 1] * xs_[n - 1]);
  } else {
    const int i = cell_of(x);
    raw = phis_[i] + integral_cell(i, x) - 0.5 * (x * x - xs_[i] * xs_[i]);
  }
  return raw - phi0_;
}

TransportSolution TransportSolution::quadratic(MatrixXd N, VectorXd shift) {
  if (N.rows() != N.cols() || N.rows() != shift.size()) {
    throw DimensionMismatch("TransportSolution::quadratic: dimensions disagree");
  }
  QuadraticPotential q;
  q.N = 0.5 * (N + N.transpose()).eval();
  q.shift = std::move(shift);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(q.N);
  if (es.eigenvalues().minCoeff() <= -1.0 + 1e-12) {
    throw SingularPerturbation("TransportSolution: I+N not positive definite");
  }
  TransportSolution s;
  const MatrixXd ipn = MatrixXd::Identity(q.N.rows(), q.N.cols()) + q.N;
  s.lu_ = std::make_shared<const Eigen::PartialPivLU<MatrixXd>>(ipn);
  s.repr_ = std::move(q);
  return s;
}

TransportSolution TransportSolution::monotone1d(Monotone1D m) {
  TransportSolution s;
  std::vector<Coord> coords;
  coords.emplace_back(std::move(m));
  s.repr_ = std::move(coords);
  return s;
}

TransportSolution TransportSolution::composite(std::vector<Coord> coords) {
  if (coords.empty()) {
    throw DimensionMismatch("TransportSolution::composite: no coordinates");
  }
  TransportSolution s;
  s.repr_ = std::move(coords);
  return s;
}

int TransportSolution::dim() const {
  if (const auto* q = std::get_if<QuadraticPotential>(&repr_)) {
    return static_cast<int>(q->N.rows());
  }
  return static_cast<int>(std::get<std::vector<Coord>>(repr_).size());
}

bool TransportSolution::closed_form() const {
  if (std::holds_alternative<QuadraticPotential>(repr_)) return true;
  for (const auto& c : std::get<std::vector<Coord>>(repr_)) {
    if (std::holds_alternative<Monotone1D>(c)) return false;
  }
  return true;
}

const TransportSolution::QuadraticPotential* TransportSolution::as_quadratic() const {
  return std::get_if<QuadraticPotential>(&repr_);
}

const std::vector<TransportSolution::Coord>* TransportSolution::as_coords() const {
  return std::get_if<std::vector<Coord>>(&repr_);
}

VectorXd TransportSolution::map(const VectorXd& x) const {
  if (x.size() != dim()) throw DimensionMismatch("TransportSolution::map: bad x");
  if (const auto* q = std::get_if<QuadraticPotential>(&repr_)) {
    return x + q->N * x + q->shift;
  }
  const auto& coords = std::get<std::vector<Coord>>(repr_);
  VectorXd y(x.size());
  for (int i = 0; i < x.size(); ++i) {
    y[i] = std::visit(
        [&](const auto& c) -> double {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, Affine1D>) {
            return c.slope * x[i] + c.intercept;
          } else {
            return c.map(x[i]);
          }
        },
        coords[i]);
  }
  return y;
}

VectorXd TransportSolution::inverse(const VectorXd& y) const {
  if (y.size() != dim()) throw DimensionMismatch("TransportSolution::inverse: bad y");
  if (const auto* q = std::get_if<QuadraticPotential>(&repr_)) {
    return lu_->solve(y - q->shift);
  }
  const auto& coords = std::get<std::vector<Coord>>(repr_);
  VectorXd x(y.size());
  for (int i = 0; i < y.size(); ++i) {
    x[i] = std::visit(
        [&](const auto& c) -> double {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, Affine1D>) {
            return (y[i] - c.intercept) / c.slope;
          } else {
            return c.inverse(y[i]);
          }
        },
        coords[i]);
  }
  return x;
}

double TransportSolution::phi(const VectorXd& x) const {
  if (x.size() != dim()) throw DimensionMismatch("TransportSolution::phi: bad x");
  if (const auto* q = std::get_if<QuadraticPotential>(&repr_)) {
    return 0.5 * x.dot(q->N * x) + q->shift.dot(x);
  }
  const auto& coords = std::get<std::vector<Coord>>(repr_);
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    acc += std::visit(
        [&](const auto& c) -> double {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, Affine1D>) {
            return 0.5 * (c.slope - 1.0) * x[i] * x[i] + c.intercept * x[i];
          } else {
            return c.phi(x[i]);
          }
        },
        coords[i]);
  }
  return acc;
}

VectorXd TransportSolution::grad_phi(const VectorXd& x) const {
  return map(x) - x;
}

MatrixXd TransportSolution::hessian_phi(const VectorXd& x) const {
  if (x.size() != dim()) throw DimensionMismatch("TransportSolution::hessian_phi: bad x");
  if (const auto* q = std::get_if<QuadraticPotential>(&repr_)) {
    return q->N;
  }
  const auto& coords = std::get<std::vector<Coord>>(repr_);
  MatrixXd H = MatrixXd::Zero(x.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    H(i, i) = std::visit(
        [&](const auto& c) -> double {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, Affine1D>) {
            return c.slope - 1.0;
          } else {
            return c.deriv(x[i]) - 1.0;
          }
        },
        coords[i]);
  }
  return H;
}

double TransportSolution::ou_phi(const VectorXd& x) const {
  if (const auto* q = std::get_if<QuadraticPotential>(&repr_)) {
    return x.dot(q->N * x + q->shift) - q->N.trace();
  }
  const auto& coords = std::get<std::vector<Coord>>(repr_);
  double acc = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    acc += std::visit(
        [&](const auto& c) -> double {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, Affine1D>) {
            const double d = c.slope - 1.0;
            return x[i] * (d * x[i] + c.intercept) - d;
          } else {
            return x[i] * (c.map(x[i]) - x[i]) - (c.deriv(x[i]) - 1.0);
          }
        },
        coords[i]);
  }
  return acc;
}

}  // namespace otlab
