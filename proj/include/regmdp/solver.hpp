#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "regmdp/mdp.hpp"
#include "regmdp/regularizer.hpp"
#include "regmdp/types.hpp"

namespace regmdp {

/// Converged solve: optimal values, action values, policy, and per-state
/// normalization multipliers. policy rows reproduce project() on the q_star
/// rows and v_star carries the matching projection values, both by
/// construction of the final assembly pass.
struct Solution {
  ValueFn v_star;
  QFn q_star;
  Policy policy;
  std::vector<double> mu;
  std::size_t iterations = 0;
  double final_residual = 0.0;
};

/// One regularized Bellman backup: per state, the maximum over policies of
/// expected Q plus the lambda-weighted bonus. lambda = 0 is the plain row
/// max with lowest-index argmax. When policy_out / mu_out are non-null they
/// receive the maximizing policy and multipliers; a pre-sized mu_out also
/// seeds the per-state root searches (warm start).
ValueFn bellman_operator(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                         std::span<const double> v, Policy* policy_out = nullptr,
                         std::vector<double>* mu_out = nullptr);

/// Iterates the backup from V = 0 until the sup-norm update drops below tol,
/// then assembles the Solution with one projection pass over q_from_v of the
/// final iterate. The returned values are within tol * gamma / (1 - gamma)
/// of the true fixed point. Throws convergence_error when max_iter runs out.
Solution value_iterate(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                       double tol = 1e-8, std::size_t max_iter = 100000);

/// Policy iteration for lambda > 0: alternates exact policy evaluation with
/// per-state projection on the evaluated Q, starting from the uniform policy
/// (or from projecting a seeded random Q in [0,10] when q0_seed is given).
/// Stops when the policy's sup-norm change or the Q improvement falls below
/// tol. Evaluated Q values must not decrease: a drop beyond 1e-8 raises
/// internal_inconsistency_error since the improvement step guarantees
/// monotonicity. improvement_trace, when given, records the worst (s,a)
/// change of evaluated Q per round, one entry per evaluation after the first.
Solution rpi(const TabularMdp& mdp, const Regularizer& reg, double lambda, double tol = 1e-8,
             std::size_t max_iter = 500,
             std::optional<std::uint64_t> q0_seed = std::nullopt,
             std::vector<double>* improvement_trace = nullptr);

/// Plain value iteration, greedy deterministic policy with lowest-index tie
/// breaking. Identical to value_iterate with lambda = 0.
Solution solve_unregularized(const TabularMdp& mdp, double tol = 1e-8,
                             std::size_t max_iter = 100000);

}  // namespace regmdp
