#pragma once

#include <stdexcept>
#include <string>

namespace oca {

/// Raised when an exact enumeration would exceed its configuration budget.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an objective or density evaluates to a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double at)
      : std::runtime_error(what + " (at " + std::to_string(at) + ")"), at_(at) {}

  double at() const noexcept { return at_; }

 private:
  double at_;
};

}  // namespace oca
