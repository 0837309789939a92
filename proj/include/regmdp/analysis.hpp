#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "regmdp/mdp.hpp"
#include "regmdp/regularizer.hpp"
#include "regmdp/solver.hpp"
#include "regmdp/types.hpp"

namespace regmdp {

/// One row of a lambda sweep. Numeric fields stay NaN when the solve for
/// that lambda failed (ok = false, status holds the reason).
struct SweepRecord {
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double uniformity_gap = std::numeric_limits<double>::quiet_NaN();
  double err_thm5 = std::numeric_limits<double>::quiet_NaN();
  double bound_thm5 = std::numeric_limits<double>::quiet_NaN();
  double policy_subopt = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  /// support_histogram[k] counts states whose policy keeps k actions above
  /// the sparsity threshold; length n_actions + 1.
  std::vector<std::size_t> support_histogram;
  /// Action probabilities of the designated probe state.
  std::vector<double> probe_pi;
  bool ok = false;
  std::string status;
};

/// Zero threshold shared by sparsity counting and the sweep, matching the
/// projection's support snapping so counts are exact.
inline constexpr double kSparsityEps = 1e-9;

/// Fraction of (state, action) pairs with probability above epsilon.
/// A deterministic policy scores 1/|A|, the uniform policy scores 1.
double sparsity(const Policy& policy, double epsilon);

/// max over (s,a) of |pi(a|s) - 1/|A||; 0 exactly for the uniform policy.
double uniformity_gap(const Policy& policy);

struct SandwichReport {
  bool lower_ok = false;
  bool upper_ok = false;
  /// Largest violation of either side; negative means both inequalities held
  /// with margin.
  double max_violation = 0.0;
};

/// Checks, entrywise on v, that the regularized backup dominates the hard
/// one and exceeds it by at most lambda * phi(1/|A|), with 1e-10 slack.
SandwichReport check_sandwich(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                              const ValueFn& v);

struct PerformanceError {
  double err = 0.0;    // sup-norm distance between regularized and plain optima
  double bound = 0.0;  // lambda * phi(1/|A|) / (1 - gamma)
  bool pass = false;
};

/// Solves both the regularized and the plain problem at tolerance tol and
/// checks the performance-error bound: the regularized values must dominate
/// the plain ones and differ by at most the bound. Both comparisons allow
/// 10 * tol of solver slack, since each solve is only accurate to
/// tol * gamma / (1 - gamma).
PerformanceError check_performance_error(const TabularMdp& mdp, const Regularizer& reg,
                                         double lambda, double tol);

/// Evaluates solution.policy with the regularizer switched off and returns
/// its sup-norm shortfall against the plain optimum.
double policy_suboptimality(const TabularMdp& mdp, const Solution& solution);
/// Same, against a precomputed plain optimum (saves the reference solve).
double policy_suboptimality(const TabularMdp& mdp, const Solution& solution,
                            const ValueFn& v_unregularized);

enum class SolverChoice { vi, rpi };

/// Monitored states: index 0 for generated random MDPs (and anything
/// unrecognized); for gridworlds the center, a mid-edge state, and a
/// mid-diagonal state. The first entry is the sweep's default probe.
std::vector<std::size_t> default_probe_states(const TabularMdp& mdp);

/// Solves once per lambda and distills each solution into a SweepRecord.
/// lambdas must be positive, finite, and sorted ascending. A solver failure
/// at one lambda is recorded in that row and the sweep continues; only the
/// shared unregularized reference solve is fatal. Rows are independent, so
/// up to n_threads of them run concurrently (0 picks the hardware count);
/// results and ordering do not depend on the thread count.
std::vector<SweepRecord> lambda_sweep(const TabularMdp& mdp, const Regularizer& reg,
                                      const std::vector<double>& lambdas, SolverChoice solver,
                                      double tol, std::size_t probe_state,
                                      unsigned n_threads = 1);

}  // namespace regmdp
