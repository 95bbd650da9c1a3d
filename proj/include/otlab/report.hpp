#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace otlab {

// One named numeric check.  `relation` describes how `value` was compared to
// `bound`: "<=", ">=", "abs<=" (|value| <= bound), "==" (within tolerance),
// or "flag" (pass recorded directly).
struct CheckResult {
  std::string name;
  double value = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::string relation = "flag";
  double tolerance = 0.0;
  bool pass = true;
  std::string provenance;  // closed-form | quadrature | mc | structural
  std::string note;
};

class Report {
 public:
  Report() = default;
  explicit Report(std::string title) : title(std::move(title)) {}

  std::string title;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> metrics;

  bool passed() const;

  CheckResult& add_le(const std::string& name, double value, double bound,
                      double tol, const std::string& provenance);
  CheckResult& add_ge(const std::string& name, double value, double bound,
                      double tol, const std::string& provenance);
  CheckResult& add_abs_le(const std::string& name, double value, double bound,
                          const std::string& provenance);
  CheckResult& add_eq(const std::string& name, double value, double target,
                      double tol, const std::string& provenance);
  CheckResult& add_flag(const std::string& name, bool pass,
                        const std::string& note = "");

  void metric(const std::string& name, double value);
  double metric_value(const std::string& name) const;
  const CheckResult* find(const std::string& name) const;
  void absorb(const Report& other, const std::string& prefix);
};

}  // namespace otlab
