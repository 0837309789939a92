#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "regmdp/regularizer.hpp"

namespace regmdp {

/// One state's optimal action distribution under a regularized maximization,
/// together with the normalization multiplier mu and the attained value.
struct ProjectionResult {
  std::vector<double> pi;
  double mu = 0.0;
  double value = 0.0;
  std::size_t support_size = 0;
};

/// Maximizes sum_a pi(a) * (q(a) + lambda * phi(pi(a))) over the probability
/// simplex. The unique maximizer is pi(a) = g((mu - q(a)) / lambda) where mu
/// is the root of sum_a pi(a) = 1; mu is found by safeguarded Newton/bisection
/// on the bracket [max q + lambda f'(1-), max q + lambda f'(0+)] (the upper
/// end grows by doubling when f'(0+) is infinite). Stops once |sum pi - 1|
/// drops below 1e-13 or the bracket narrows to 1e-13 * (1 + |mu|).
///
/// When the regularizer can produce exact zeros (finite f'(0+)), entries
/// below 1e-9 are snapped to 0, mu is re-solved on the remaining support, and
/// the result is renormalized. Throws std::invalid_argument on non-finite
/// input or lambda <= 0; convergence_error if bracketing fails.
ProjectionResult project(const Regularizer& reg, std::span<const double> q_row, double lambda);

/// Same computation started from a caller-supplied guess for mu (clamped into
/// the bracket). Identical tolerances; solvers use this to warm-start from the
/// previous sweep's multiplier.
ProjectionResult project(const Regularizer& reg, std::span<const double> q_row, double lambda,
                         double mu_hint);

/// sum_a g((mu - q(a)) / lambda) - 1: positive below the root, negative above,
/// strictly decreasing in between. Exposed so tests can check the bracket
/// endpoints directly.
double normalization_residual(const Regularizer& reg, std::span<const double> q_row,
                              double lambda, double mu);

/// The regularized value computed two ways: (i) the objective
/// sum_a pi (q + lambda phi(pi)) with 0 phi(0) = 0 and (ii) the multiplier
/// form mu - lambda sum_{pi>0} pi^2 phi'(pi). Returns form (i) after checking
/// that the forms agree to 1e-9 * max(1, |value|); throws
/// internal_inconsistency_error otherwise. Where phi' does not exist (a
/// pointwise-min branch crossing) the slope the optimality system selects,
/// (mu - q)/lambda recentred by phi, stands in for it.
double regularized_value(const Regularizer& reg, std::span<const double> q_row, double lambda,
                         const ProjectionResult& result);

/// |form (i) - form (ii)| from regularized_value, without the throw. Lets
/// callers assert a tolerance of their own choosing.
double value_form_gap(const Regularizer& reg, std::span<const double> q_row, double lambda,
                      const ProjectionResult& result);

/// Worst first-order optimality violation of result:
///   max over supported a of |q(a) + lambda f'(pi(a)) - mu|, and over
///   unsupported a of max{0, q(a) + lambda f'(0+) - mu} (skipped when f'(0+)
///   is infinite, where no action may be dropped). At a branch crossing the
///   distance from (mu - q)/lambda to the f' jump interval is used.
double kkt_residual(const Regularizer& reg, std::span<const double> q_row, double lambda,
                    const ProjectionResult& result);

/// Slow independent maximizer for tests. |A| <= 4 enumerates a barycentric
/// grid of the given resolution and refines around the best cell; larger
/// rows run projected-gradient ascent with steps 1/(t+10) for 1e5 iterations.
/// Throws std::invalid_argument if resolution < 2.
std::vector<double> brute_force_project(const Regularizer& reg, std::span<const double> q_row,
                                        double lambda, std::size_t resolution);

}  // namespace regmdp
