#pragma once

#include <stdexcept>
#include <string>

namespace snrmm {

/// Thrown when an argument lies outside the domain of an operation.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown by iterative numerics that ran out of budget. Carries the best
/// estimate reached so callers can decide whether it is usable.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

private:
  double estimate_;
  double error_bound_;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

} // namespace detail
} // namespace snrmm
