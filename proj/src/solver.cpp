#include "regmdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "regmdp/errors.hpp"
#include "regmdp/projection.hpp"
#include "regmdp/rng.hpp"

namespace regmdp {

namespace {

void q_row_into(const TabularMdp& mdp, std::span<const double> v, std::size_t s,
                std::vector<double>& out) {
  out.resize(mdp.n_actions);
  for (std::size_t a = 0; a < mdp.n_actions; ++a) {
    const auto row = mdp.transition_row(s, a);
    double exp_v = 0.0;
    for (std::size_t t = 0; t < mdp.n_states; ++t) exp_v += row[t] * v[t];
    out[a] = mdp.reward.at(s, a) + mdp.gamma * exp_v;
  }
}

/// Maximizes one state's objective over the simplex. hint, when given, seeds
/// the multiplier search with the previous sweep's root.
double maximize_row(const Regularizer& reg, double lambda, std::span<const double> q,
                    std::span<double> pi_row, double& mu, const double* hint) {
  if (lambda == 0.0) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
      if (q[a] > q[best]) best = a;  // ties keep the lowest index
    std::fill(pi_row.begin(), pi_row.end(), 0.0);
    pi_row[best] = 1.0;
    mu = q[best];
    return q[best];
  }
  const ProjectionResult res = hint ? project(reg, q, lambda, *hint) : project(reg, q, lambda);
  std::copy(res.pi.begin(), res.pi.end(), pi_row.begin());
  mu = res.mu;
  return res.value;
}

ValueFn apply_backup(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                     std::span<const double> v, Policy* policy_out, std::vector<double>* mu_io) {
  if (v.size() != mdp.n_states)
    throw std::invalid_argument("bellman_operator: value function has " +
                                std::to_string(v.size()) + " entries, expected " +
                                std::to_string(mdp.n_states));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("bellman_operator: lambda must be finite and >= 0");

  const bool warm = mu_io && mu_io->size() == mdp.n_states && lambda > 0.0;
  if (mu_io) mu_io->resize(mdp.n_states);
  if (policy_out) *policy_out = Policy(mdp.n_states, mdp.n_actions, 0.0);

  ValueFn out(mdp.n_states, 0.0);
  std::vector<double> q;
  std::vector<double> pi_scratch(mdp.n_actions);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    q_row_into(mdp, v, s, q);
    std::span<double> pi_row =
        policy_out ? policy_out->row(s) : std::span<double>(pi_scratch);
    double mu = 0.0;
    const double* hint = warm ? &(*mu_io)[s] : nullptr;
    out[s] = maximize_row(reg, lambda, q, pi_row, mu, hint);
    if (mu_io) (*mu_io)[s] = mu;
  }
  return out;
}

/// Builds the Solution fields from a value estimate: Q from one backup of v,
/// then a projection per state so the stored policy, multipliers, and values
/// are mutually consistent by construction.
Solution assemble(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                  const ValueFn& v, const std::vector<double>& hints) {
  Solution sol;
  sol.q_star = q_from_v(mdp, v);
  sol.policy = Policy(mdp.n_states, mdp.n_actions, 0.0);
  sol.mu.assign(mdp.n_states, 0.0);
  sol.v_star.assign(mdp.n_states, 0.0);
  const bool warm = hints.size() == mdp.n_states && lambda > 0.0;
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    const double* hint = warm ? &hints[s] : nullptr;
    sol.v_star[s] =
        maximize_row(reg, lambda, sol.q_star.row(s), sol.policy.row(s), sol.mu[s], hint);
  }
  return sol;
}

}  // namespace

ValueFn bellman_operator(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                         std::span<const double> v, Policy* policy_out,
                         std::vector<double>* mu_out) {
  return apply_backup(mdp, reg, lambda, v, policy_out, mu_out);
}

Solution value_iterate(const TabularMdp& mdp, const Regularizer& reg, double lambda, double tol,
                       std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iterate: tol must be > 0");

  ValueFn v(mdp.n_states, 0.0);
  std::vector<double> mu;  // filled on the first backup, warm-starts the rest
  double resid = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (it < max_iter) {
    ++it;
    const ValueFn next = apply_backup(mdp, reg, lambda, v, nullptr, &mu);
    resid = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s)
      resid = std::max(resid, std::abs(next[s] - v[s]));
    v = next;
    if (resid < tol) {
      Solution sol = assemble(mdp, reg, lambda, v, mu);
      sol.iterations = it;
      sol.final_residual = resid;
      return sol;
    }
  }
  throw convergence_error("value_iterate: residual still above tol after max_iter backups",
                          resid, max_iter);
}

Solution rpi(const TabularMdp& mdp, const Regularizer& reg, double lambda, double tol,
             std::size_t max_iter, std::optional<std::uint64_t> q0_seed,
             std::vector<double>* improvement_trace) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("rpi: lambda must be finite and > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("rpi: tol must be > 0");

  const std::size_t s_n = mdp.n_states, a_n = mdp.n_actions;
  Policy policy(s_n, a_n, 1.0 / static_cast<double>(a_n));
  if (q0_seed) {
    SplitMix64 rng(*q0_seed);
    std::vector<double> q0(a_n);
    for (std::size_t s = 0; s < s_n; ++s) {
      for (std::size_t a = 0; a < a_n; ++a) q0[a] = rng.next_double(0.0, 10.0);
      double mu = 0.0;
      maximize_row(reg, lambda, q0, policy.row(s), mu, nullptr);
    }
  }

  QFn prev_q;
  bool have_prev = false;
  std::vector<double> mu(s_n, 0.0);
  bool warm = false;
  double pol_change = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Evaluation ev = evaluate_policy_exact(mdp, reg, lambda, policy);

    double q_change = std::numeric_limits<double>::infinity();
    if (have_prev) {
      double worst_drop = 0.0;
      q_change = 0.0;
      for (std::size_t i = 0; i < ev.q.v.size(); ++i) {
        const double d = ev.q.v[i] - prev_q.v[i];
        q_change = std::max(q_change, std::abs(d));
        worst_drop = std::min(worst_drop, d);
      }
      if (improvement_trace) improvement_trace->push_back(worst_drop);
      if (worst_drop < -1e-8)
        throw internal_inconsistency_error(
            "rpi: evaluated Q dropped by " + std::to_string(-worst_drop) +
            " between improvement rounds");
    }

    Solution sol;
    sol.policy = Policy(s_n, a_n, 0.0);
    sol.mu.assign(s_n, 0.0);
    sol.v_star.assign(s_n, 0.0);
    pol_change = 0.0;
    for (std::size_t s = 0; s < s_n; ++s) {
      const double* hint = warm ? &mu[s] : nullptr;
      sol.v_star[s] =
          maximize_row(reg, lambda, ev.q.row(s), sol.policy.row(s), sol.mu[s], hint);
      for (std::size_t a = 0; a < a_n; ++a)
        pol_change = std::max(pol_change, std::abs(sol.policy.at(s, a) - policy.at(s, a)));
      mu[s] = sol.mu[s];
    }
    warm = true;

    policy = sol.policy;
    prev_q = std::move(ev.q);
    have_prev = true;
    if (pol_change < tol || q_change < tol) {
      sol.q_star = std::move(prev_q);
      sol.iterations = it;
      sol.final_residual = pol_change;
      return sol;
    }
  }
  throw convergence_error("rpi: policy still changing after max_iter rounds", pol_change,
                          max_iter);
}

Solution solve_unregularized(const TabularMdp& mdp, double tol, std::size_t max_iter) {
  // Shares the lambda = 0 path of value_iterate; the regularizer is never
  // evaluated there.
  return value_iterate(mdp, Regularizer::shannon(), 0.0, tol, max_iter);
}

}  // namespace regmdp
