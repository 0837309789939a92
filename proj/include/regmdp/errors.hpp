#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regmdp {

/// Thrown when a derivative is requested inside the guard band around a
/// kink of a min() regularizer, where phi' does not exist.
class non_differentiable_error : public std::domain_error {
public:
  non_differentiable_error(const std::string& what, double where)
      : std::domain_error(what), point(where) {}
  double point;
};

/// An iterative routine ran out of its step budget before reaching tolerance.
/// Carries the last observed residual as a diagnostic.
class convergence_error : public std::runtime_error {
public:
  convergence_error(const std::string& what, double residual, std::size_t iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  std::size_t iterations;
};

/// Two redundant internal computations disagreed beyond tolerance.
class internal_inconsistency_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace regmdp
