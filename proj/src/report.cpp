#include "otlab/report.hpp"

#include <cmath>
#include <stdexcept>

namespace otlab {

bool Report::passed() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

CheckResult& Report::add_le(const std::string& name, double value,
                            double bound, double tol,
                            const std::string& provenance) {
  CheckResult c;
  c.name = name;
  c.value = value;
  c.bound = bound;
  c.relation = "<=";
  c.tolerance = tol;
  c.provenance = provenance;
  c.pass = std::isfinite(value) && value <= bound + tol;
  checks.push_back(std::move(c));
  return checks.back();
}

CheckResult& Report::add_ge(const std::string& name, double value,
                            double bound, double tol,
                            const std::string& provenance) {
  CheckResult c;
  c.name = name;
  c.value = value;
  c.bound = bound;
  c.relation = ">=";
  c.tolerance = tol;
  c.provenance = provenance;
  c.pass = std::isfinite(value) && value >= bound - tol;
  checks.push_back(std::move(c));
  return checks.back();
}

CheckResult& Report::add_abs_le(const std::string& name, double value,
                                double bound,
                                const std::string& provenance) {
  CheckResult c;
  c.name = name;
  c.value = value;
  c.bound = bound;
  c.relation = "abs<=";
  c.tolerance = 0.0;
  c.provenance = provenance;
  c.pass = std::isfinite(value) && std::abs(value) <= bound;
  checks.push_back(std::move(c));
  return checks.back();
}

CheckResult& Report::add_eq(const std::string& name, double value,
                            double target, double tol,
                            const std::string& provenance) {
  CheckResult c;
  c.name = name;
  c.value = value;
  c.bound = target;
  c.relation = "==";
  c.tolerance = tol;
  c.provenance = provenance;
  c.pass = std::isfinite(value) && std::abs(value - target) <= tol;
  checks.push_back(std::move(c));
  return checks.back();
}

CheckResult& Report::add_flag(const std::string& name, bool pass,
                              const std::string& note) {
  CheckResult c;
  c.name = name;
  c.relation = "flag";
  c.pass = pass;
  c.note = note;
  c.provenance = "structural";
  checks.push_back(std::move(c));
  return checks.back();
}

void Report::metric(const std::string& name, double value) {
  metrics.emplace_back(name, value);
}

double Report::metric_value(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.first == name) return m.second;
  }
  throw std::out_of_range("report metric not found: " + name);
}

const CheckResult* Report::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void Report::absorb(const Report& other, const std::string& prefix) {
  for (auto c : other.checks) {
    c.name = prefix + c.name;
    checks.push_back(std::move(c));
  }
  for (auto m : other.metrics) {
    metrics.emplace_back(prefix + m.first, m.second);
  }
}

}  // namespace otlab
