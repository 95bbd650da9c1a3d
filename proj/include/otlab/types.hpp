#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace otlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Default tolerance for quantities that admit a closed form (relative scale).
inline constexpr double kClosedFormTol = 1e-10;
// Monte Carlo assertions use mean +/- kMcSigmas * standard error.
inline constexpr double kMcSigmas = 4.0;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularPerturbation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonIntegrableDensity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonMonotoneInterpolant : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooManyIntegratedDims : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateWeights : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsolvableRegime : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace otlab
