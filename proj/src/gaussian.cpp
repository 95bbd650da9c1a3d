#include "otlab/gaussian.hpp"

#include <cmath>
#include <string>

namespace otlab {

Functional Functional::constant(int dim, double c) {
  Functional f;
  f.kind_ = Kind::Constant;
  f.dim_ = dim;
  f.depends_on_first_ = 0;
  f.constant_ = c;
  f.convexity_bound_ = 0.0;
  return f;
}

Functional Functional::linear(VectorXd h, double c) {
  Functional f;
  f.kind_ = Kind::Linear;
  f.dim_ = static_cast<int>(h.size());
  f.h_ = std::move(h);
  f.constant_ = c;
  int d = 0;
  for (int i = 0; i < f.dim_; ++i) {
    if (f.h_[i] != 0.0) d = i + 1;
  }
  f.depends_on_first_ = d;
  f.convexity_bound_ = 0.0;
  return f;
}

Functional Functional::quadratic(MatrixXd S, VectorXd h, double c) {
  if (S.rows() != S.cols() || S.rows() != h.size()) {
    throw DimensionMismatch("Functional::quadratic: S and h dimensions disagree");
  }
  Functional f;
  f.kind_ = Kind::Quadratic;
  f.dim_ = static_cast<int>(h.size());
  f.quad_.S = 0.5 * (S + S.transpose()).eval();
  f.quad_.h = std::move(h);
  f.quad_.c = c;
  f.constant_ = c;
  int d = 0;
  for (int i = 0; i < f.dim_; ++i) {
    if (f.quad_.h[i] != 0.0 || f.quad_.S.row(i).cwiseAbs().sum() != 0.0) d = i + 1;
  }
  f.depends_on_first_ = d;
  if (f.dim_ > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(f.quad_.S);
    f.convexity_bound_ = es.eigenvalues().minCoeff();
  } else {
    f.convexity_bound_ = 0.0;
  }
  return f;
}

Functional Functional::separable(std::vector<ScalarFunction> parts) {
  Functional f;
  f.kind_ = Kind::Separable;
  f.dim_ = static_cast<int>(parts.size());
  f.depends_on_first_ = f.dim_;
  f.parts_ = std::move(parts);
  return f;
}

Functional Functional::custom(int dim, std::function<double(const VectorXd&)> f,
                              std::function<VectorXd(const VectorXd&)> grad,
                              std::function<MatrixXd(const VectorXd&)> hess) {
  Functional out;
  out.kind_ = Kind::Custom;
  out.dim_ = dim;
  out.depends_on_first_ = dim;
  out.custom_.f = std::move(f);
  out.custom_.grad = std::move(grad);
  out.custom_.hess = std::move(hess);
  return out;
}

Functional& Functional::with_depends_on_first(int d) {
  if (d < 0 || d > dim_) throw DimensionMismatch("with_depends_on_first: bad d");
  depends_on_first_ = d;
  return *this;
}

Functional& Functional::with_convexity_lower_bound(double b) {
  convexity_bound_ = b;
  return *this;
}

std::optional<double> Functional::convexity_lower_bound() const {
  return convexity_bound_;
}

bool Functional::uses_fd_hessian() const {
  return kind_ == Kind::Custom && !custom_.hess;
}

const Functional::QuadraticData& Functional::quadratic_data() const {
  if (kind_ != Kind::Quadratic) {
    throw std::logic_error("Functional: not a quadratic functional");
  }
  return quad_;
}

const std::vector<ScalarFunction>& Functional::separable_parts() const {
  if (kind_ != Kind::Separable) {
    throw std::logic_error("Functional: not a separable functional");
  }
  return parts_;
}

double Functional::value(const VectorXd& x) const {
  if (x.size() != dim_) throw DimensionMismatch("Functional::value: bad x size");
  switch (kind_) {
    case Kind::Constant:
      return constant_;
    case Kind::Linear:
      return h_.dot(x) + constant_;
    case Kind::Quadratic:
      return 0.5 * x.dot(quad_.S * x) + quad_.h.dot(x) + quad_.c;
    case Kind::Separable: {
      double acc = 0.0;
      for (int i = 0; i < dim_; ++i) acc += parts_[i].f(x[i]);
      return acc;
    }
    case Kind::Custom:
      return custom_.f(x);
  }
  return 0.0;
}

VectorXd Functional::gradient(const VectorXd& x) const {
  if (x.size() != dim_) throw DimensionMismatch("Functional::gradient: bad x size");
  switch (kind_) {
    case Kind::Constant:
      return VectorXd::Zero(dim_);
    case Kind::Linear:
      return h_;
    case Kind::Quadratic:
      return quad_.S * x + quad_.h;
    case Kind::Separable: {
      VectorXd g(dim_);
      for (int i = 0; i < dim_; ++i) g[i] = parts_[i].df(x[i]);
      return g;
    }
    case Kind::Custom:
      return custom_.grad(x);
  }
  return VectorXd::Zero(dim_);
}

MatrixXd Functional::hessian(const VectorXd& x) const {
  if (x.size() != dim_) throw DimensionMismatch("Functional::hessian: bad x size");
  switch (kind_) {
    case Kind::Constant:
    case Kind::Linear:
      return MatrixXd::Zero(dim_, dim_);
    case Kind::Quadratic:
      return quad_.S;
    case Kind::Separable: {
      MatrixXd H = MatrixXd::Zero(dim_, dim_);
      for (int i = 0; i < dim_; ++i) H(i, i) = parts_[i].ddf(x[i]);
      return H;
    }
    case Kind::Custom: {
      if (custom_.hess) return custom_.hess(x);
      // Central finite differences of the gradient; callers can detect this
      // path through uses_fd_hessian().
      MatrixXd H(dim_, dim_);
      VectorXd xp = x, xm = x;
      for (int j = 0; j < dim_; ++j) {
        const double step = 1e-5 * (1.0 + std::abs(x[j]));
        xp[j] = x[j] + step;
        xm[j] = x[j] - step;
        H.col(j) = (custom_.grad(xp) - custom_.grad(xm)) / (2.0 * step);
        xp[j] = x[j];
        xm[j] = x[j];
      }
      return 0.5 * (H + H.transpose()).eval();
    }
  }
  return MatrixXd::Zero(dim_, dim_);
}

double Functional::audit_gradient(int count, std::uint64_t seed, double step) const {
  const GaussianSpace space{dim_};
  const SampleBatch batch = sample(space, count, seed);
  double worst = 0.0;
  for (int i = 0; i < batch.count(); ++i) {
    const VectorXd x = batch.points.row(i);
    const VectorXd g = gradient(x);
    VectorXd xp = x, xm = x;
    for (int j = 0; j < dim_; ++j) {
      const double h = step * (1.0 + std::abs(x[j]));
      xp[j] = x[j] + h;
      xm[j] = x[j] - h;
      const double fd = (value(xp) - value(xm)) / (2.0 * h);
      xp[j] = x[j];
      xm[j] = x[j];
      worst = std::max(worst, std::abs(fd - g[j]) / (1.0 + std::abs(g[j])));
    }
  }
  return worst;
}

SampleBatch sample(const GaussianSpace& space, int count, std::uint64_t seed) {
  if (space.dim <= 0 || count <= 0) {
    throw DimensionMismatch("sample: dimension and count must be positive");
  }
  SampleBatch batch;
  batch.seed = seed;
  batch.points.resize(count, space.dim);
  const CounterRng rng(seed);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t base = static_cast<std::uint64_t>(i) * space.dim;
    for (int j = 0; j < space.dim; ++j) {
      batch.points(i, j) = rng.normal(kStreamBatch, base + j);
    }
  }
  return batch;
}

double ou_operator(const Functional& f, const VectorXd& x) {
  return x.dot(f.gradient(x)) - f.hessian(x).trace();
}

ConvexityReport check_one_convex(const Functional& f, const SampleBatch& batch,
                                 double tol) {
  ConvexityReport report;
  report.tol = tol;
  switch (f.kind()) {
    case Functional::Kind::Constant:
    case Functional::Kind::Linear:
      report.min_eigenvalue = 0.0;
      report.exact = true;
      break;
    case Functional::Kind::Quadratic: {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(f.quadratic_data().S);
      report.min_eigenvalue = es.eigenvalues().minCoeff();
      report.exact = true;
      break;
    }
    default: {
      if (batch.dim() != f.dim()) {
        throw DimensionMismatch("check_one_convex: batch dimension mismatch");
      }
      double lo = std::numeric_limits<double>::infinity();
      for (int i = 0; i < batch.count(); ++i) {
        const VectorXd x = batch.points.row(i);
        if (f.kind() == Functional::Kind::Separable) {
          const auto& parts = f.separable_parts();
          for (int j = 0; j < f.dim(); ++j) lo = std::min(lo, parts[j].ddf(x[j]));
        } else {
          Eigen::SelfAdjointEigenSolver<MatrixXd> es(f.hessian(x));
          lo = std::min(lo, es.eigenvalues().minCoeff());
        }
      }
      report.min_eigenvalue = lo;
      report.exact = false;
      break;
    }
  }
  report.one_convex = report.min_eigenvalue >= -1.0 - tol;
  report.h_convex = report.min_eigenvalue >= -tol;
  return report;
}

McEstimate mc_expect(const std::function<double(const VectorXd&)>& g,
                     const SampleBatch& batch) {
  std::vector<double> values(batch.count());
  for (int i = 0; i < batch.count(); ++i) {
    values[i] = g(batch.points.row(i));
    if (!std::isfinite(values[i])) {
      throw NonFiniteValue("mc_expect: non-finite value at sample index " +
                           std::to_string(i));
    }
  }
  return mean_se(values);
}

}  // namespace otlab
