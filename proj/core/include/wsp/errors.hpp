#pragma once

#include <stdexcept>
#include <string>

namespace wsp {

/// Thrown when a subset / sign-pattern enumeration would exceed the
/// configured cap. Carries an estimate of how many items the full
/// enumeration would visit.
class CapExceeded : public std::runtime_error {
public:
  CapExceeded(const std::string& what, double count_estimate)
      : std::runtime_error(what), count_estimate_(count_estimate) {}
  double count_estimate() const noexcept { return count_estimate_; }

private:
  double count_estimate_;
};

/// No sign pattern admits a solution within the declared noise radius.
class AllPatternsInfeasible : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace wsp
