#include "regmdp/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "regmdp/errors.hpp"

namespace regmdp {

namespace {

double sup_diff(const ValueFn& a, const ValueFn& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

double sparsity(const Policy& policy, double epsilon) {
  if (policy.rows == 0 || policy.cols == 0)
    throw std::invalid_argument("sparsity: empty policy");
  if (!(epsilon >= 0.0) || epsilon >= 1.0 / static_cast<double>(policy.cols))
    throw std::invalid_argument("sparsity: epsilon must lie in [0, 1/|A|)");
  std::size_t supported = 0;
  for (double p : policy.v) supported += (p > epsilon);
  return static_cast<double>(supported) / static_cast<double>(policy.v.size());
}

double uniformity_gap(const Policy& policy) {
  if (policy.rows == 0 || policy.cols == 0)
    throw std::invalid_argument("uniformity_gap: empty policy");
  const double u = 1.0 / static_cast<double>(policy.cols);
  double gap = 0.0;
  for (double p : policy.v) gap = std::max(gap, std::abs(p - u));
  return gap;
}

SandwichReport check_sandwich(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                              const ValueFn& v) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("check_sandwich: lambda must be finite and >= 0");
  const ValueFn hard = bellman_operator(mdp, reg, 0.0, v);
  const ValueFn soft = bellman_operator(mdp, reg, lambda, v);
  const double shift =
      lambda == 0.0 ? 0.0 : lambda * reg.phi(1.0 / static_cast<double>(mdp.n_actions));

  SandwichReport rep;
  double lower_worst = -std::numeric_limits<double>::infinity();
  double upper_worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    lower_worst = std::max(lower_worst, hard[s] - soft[s]);
    upper_worst = std::max(upper_worst, soft[s] - hard[s] - shift);
  }
  rep.lower_ok = lower_worst <= 1e-10;
  rep.upper_ok = upper_worst <= 1e-10;
  rep.max_violation = std::max(lower_worst, upper_worst);
  return rep;
}

PerformanceError check_performance_error(const TabularMdp& mdp, const Regularizer& reg,
                                         double lambda, double tol) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("check_performance_error: lambda must be finite and >= 0");
  const Solution plain = solve_unregularized(mdp, tol);
  const Solution soft = value_iterate(mdp, reg, lambda, tol);

  PerformanceError out;
  out.bound = lambda == 0.0
                  ? 0.0
                  : lambda * reg.phi(1.0 / static_cast<double>(mdp.n_actions)) /
                        (1.0 - mdp.gamma);
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < mdp.n_states; ++s)
    min_gap = std::min(min_gap, soft.v_star[s] - plain.v_star[s]);
  out.err = sup_diff(soft.v_star, plain.v_star);
  out.pass = min_gap >= -10.0 * tol && out.err <= out.bound + 10.0 * tol;
  return out;
}

double policy_suboptimality(const TabularMdp& mdp, const Solution& solution,
                            const ValueFn& v_unregularized) {
  const Evaluation ev =
      evaluate_policy_exact(mdp, Regularizer::shannon(), 0.0, solution.policy);
  double worst = 0.0;
  for (std::size_t s = 0; s < mdp.n_states; ++s)
    worst = std::max(worst, v_unregularized[s] - ev.v[s]);
  return worst;
}

double policy_suboptimality(const TabularMdp& mdp, const Solution& solution) {
  return policy_suboptimality(mdp, solution, solve_unregularized(mdp, 1e-10).v_star);
}

std::vector<std::size_t> default_probe_states(const TabularMdp& mdp) {
  if (mdp.generator == "gridworld") {
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(
        static_cast<double>(mdp.n_states))));
    if (side * side == mdp.n_states && side % 2 == 1 && side >= 3) {
      const std::size_t n = (side + 1) / 2;
      const long edge = static_cast<long>(n) - 1;
      const long mid = static_cast<long>((n + 1) / 2);  // ceil(n/2) <= edge for n >= 2
      auto index = [&](long x, long y) {
        return static_cast<std::size_t>(x + edge) * side +
               static_cast<std::size_t>(y + edge);
      };
      return {index(0, 0), index(0, mid), index(mid, mid)};
    }
  }
  return {0};
}

std::vector<SweepRecord> lambda_sweep(const TabularMdp& mdp, const Regularizer& reg,
                                      const std::vector<double>& lambdas, SolverChoice solver,
                                      double tol, std::size_t probe_state, unsigned n_threads) {
  if (lambdas.empty()) throw std::invalid_argument("lambda_sweep: empty lambda list");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || !std::isfinite(lambdas[i]))
      throw std::invalid_argument("lambda_sweep: lambdas must be finite and > 0");
    if (i > 0 && lambdas[i] < lambdas[i - 1])
      throw std::invalid_argument("lambda_sweep: lambdas must be sorted ascending");
  }
  if (probe_state >= mdp.n_states)
    throw std::invalid_argument("lambda_sweep: probe state out of range");

  const ValueFn v_plain = solve_unregularized(mdp, tol).v_star;
  const double phi_u = reg.phi(1.0 / static_cast<double>(mdp.n_actions));

  std::vector<SweepRecord> out(lambdas.size());
  const auto solve_one = [&](std::size_t i) {
    SweepRecord& rec = out[i];
    const double lambda = lambdas[i];
    rec.lambda = lambda;
    try {
      const Solution sol = solver == SolverChoice::vi ? value_iterate(mdp, reg, lambda, tol)
                                                      : rpi(mdp, reg, lambda, tol);
      rec.delta = sparsity(sol.policy, kSparsityEps);
      rec.uniformity_gap = uniformity_gap(sol.policy);
      rec.err_thm5 = sup_diff(sol.v_star, v_plain);
      rec.bound_thm5 = lambda * phi_u / (1.0 - mdp.gamma);
      rec.policy_subopt = policy_suboptimality(mdp, sol, v_plain);
      rec.iterations = sol.iterations;
      rec.support_histogram.assign(mdp.n_actions + 1, 0);
      for (std::size_t s = 0; s < mdp.n_states; ++s) {
        std::size_t k = 0;
        for (double p : sol.policy.row(s)) k += (p > kSparsityEps);
        ++rec.support_histogram[k];
      }
      const auto probe = sol.policy.row(probe_state);
      rec.probe_pi.assign(probe.begin(), probe.end());
      rec.ok = true;
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.status = e.what();
    }
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, lambdas.size());
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) solve_one(i);
    return out;
  }

  // Each row is an independent solve writing only its own slot, so workers
  // just pull the next index; row order follows the input list regardless of
  // completion order and results match the sequential path exactly.
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (unsigned w = 0; w < n_threads; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < lambdas.size(); i = next.fetch_add(1))
        solve_one(i);
    });
  for (std::thread& w : workers) w.join();
  return out;
}

}  // namespace regmdp
