#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regmdp/regularizer.hpp"
#include "regmdp/types.hpp"

namespace regmdp {

/// Finite MDP with dense transition and reward tables. Immutable by
/// convention once built; the generators below and the file loader are the
/// supported constructors.
struct TabularMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  /// Row-major S x A x S transition probabilities.
  std::vector<double> transition;
  /// S x A rewards in [0, r_max].
  Table reward;
  double gamma = 0.0;
  /// Start-state distribution, length S.
  std::vector<double> initial;
  double r_max = 1.0;

  /// Provenance carried into files: how this MDP was generated.
  std::string generator;
  std::uint64_t seed = 0;
  double clip_prob = 0.0;

  std::span<const double> transition_row(std::size_t s, std::size_t a) const {
    return {transition.data() + (s * n_actions + a) * n_states, n_states};
  }
};

/// Checks every structural invariant (stochastic rows, reward bounds,
/// discount range, initial distribution). Returns human-readable violations;
/// empty means the MDP is well-formed.
std::vector<std::string> validate(const TabularMdp& mdp);

/// Dense random MDP: transition entries drawn uniform [0,1), independently
/// zeroed with probability clip_prob, rows renormalized (all-zero rows are
/// redrawn); rewards uniform [0,1); uniform initial distribution. Fully
/// determined by the seed via a splitmix64 stream.
TabularMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                      double clip_prob, std::uint64_t seed);

/// (2N-1)^2 grid over coordinates [-(N-1), N-1]^2 with deterministic moves
/// left/right (first coordinate) and up/down (second). Walls block by
/// self-transition. Entering any of the four corners pays reward 1; corners
/// are absorbing with zero further reward. Start state is the center.
TabularMdp gridworld(std::size_t n, double gamma);

/// Q(s,a) = r(s,a) + gamma * sum_{s'} P(s'|s,a) v(s').
QFn q_from_v(const TabularMdp& mdp, std::span<const double> v);

/// V(s) = sum_a pi(a|s) * (Q(s,a) + lambda * phi(pi(a|s))), with 0 phi(0)=0.
ValueFn v_from_q_policy(const Regularizer& reg, double lambda, const QFn& q,
                        const Policy& policy);

struct Evaluation {
  ValueFn v;
  QFn q;
};

/// Exact policy evaluation: solves (I - gamma P^pi) V = r^pi directly, where
/// r^pi includes the lambda phi(pi) bonus, then recovers Q through q_from_v.
Evaluation evaluate_policy_exact(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                                 const Policy& policy);

/// Fixed-point iteration of the policy's Bellman backup from Q = 0 until the
/// sup-norm Q change drops below tol. Agrees with the exact evaluation within
/// tol/(1-gamma). Throws convergence_error if max_iter is exhausted.
ValueFn evaluate_policy_iterative(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                                  const Policy& policy, double tol, std::size_t max_iter);

}  // namespace regmdp
