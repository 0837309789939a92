#include "regmdp/mdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "regmdp/errors.hpp"
#include "regmdp/rng.hpp"

namespace regmdp {

namespace {

constexpr double kStochasticTol = 1e-12;

std::string place(std::size_t s, std::size_t a) {
  return "(s=" + std::to_string(s) + ",a=" + std::to_string(a) + ")";
}

}  // namespace

std::vector<std::string> validate(const TabularMdp& mdp) {
  std::vector<std::string> out;
  const std::size_t s_n = mdp.n_states, a_n = mdp.n_actions;
  if (s_n == 0) out.push_back("n_states must be >= 1");
  if (a_n == 0) out.push_back("n_actions must be >= 1");
  if (!(mdp.gamma >= 0.0 && mdp.gamma < 1.0))
    out.push_back("gamma must lie in [0, 1), got " + std::to_string(mdp.gamma));
  if (mdp.transition.size() != s_n * a_n * s_n)
    out.push_back("transition has " + std::to_string(mdp.transition.size()) +
                  " entries, expected " + std::to_string(s_n * a_n * s_n));
  if (mdp.reward.rows != s_n || mdp.reward.cols != a_n ||
      mdp.reward.v.size() != s_n * a_n)
    out.push_back("reward table is " + std::to_string(mdp.reward.rows) + "x" +
                  std::to_string(mdp.reward.cols) + ", expected " +
                  std::to_string(s_n) + "x" + std::to_string(a_n));
  if (mdp.initial.size() != s_n)
    out.push_back("initial distribution has " + std::to_string(mdp.initial.size()) +
                  " entries, expected " + std::to_string(s_n));
  // Shape errors make the elementwise checks below unsafe to index.
  if (!out.empty()) return out;

  for (std::size_t s = 0; s < s_n; ++s) {
    for (std::size_t a = 0; a < a_n; ++a) {
      double sum = 0.0;
      bool bad_entry = false;
      for (double p : mdp.transition_row(s, a)) {
        if (!(p >= 0.0) || !std::isfinite(p)) bad_entry = true;
        sum += p;
      }
      if (bad_entry)
        out.push_back("transition row " + place(s, a) + " has a negative or non-finite entry");
      else if (std::abs(sum - 1.0) > kStochasticTol)
        out.push_back("transition row " + place(s, a) + " sums to " + std::to_string(sum));
      const double r = mdp.reward.at(s, a);
      if (!std::isfinite(r) || r < 0.0 || r > mdp.r_max)
        out.push_back("reward " + place(s, a) + " = " + std::to_string(r) +
                      " outside [0, " + std::to_string(mdp.r_max) + "]");
    }
  }
  double init_sum = 0.0;
  bool init_bad = false;
  for (double p : mdp.initial) {
    if (!(p >= 0.0) || !std::isfinite(p)) init_bad = true;
    init_sum += p;
  }
  if (init_bad)
    out.push_back("initial distribution has a negative or non-finite entry");
  else if (std::abs(init_sum - 1.0) > kStochasticTol)
    out.push_back("initial distribution sums to " + std::to_string(init_sum));
  return out;
}

TabularMdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                      double clip_prob, std::uint64_t seed) {
  if (n_states == 0 || n_actions == 0)
    throw std::invalid_argument("random_mdp: need at least one state and action");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("random_mdp: gamma must lie in [0, 1)");
  if (!(clip_prob >= 0.0 && clip_prob < 1.0))
    throw std::invalid_argument("random_mdp: clip_prob must lie in [0, 1)");

  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.transition.assign(n_states * n_actions * n_states, 0.0);
  mdp.reward = Table(n_states, n_actions);
  mdp.initial.assign(n_states, 1.0 / static_cast<double>(n_states));
  mdp.generator = "random_mdp";
  mdp.seed = seed;
  mdp.clip_prob = clip_prob;

  SplitMix64 rng(seed);
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double* row = mdp.transition.data() + (s * n_actions + a) * n_states;
      double sum = 0.0;
      do {
        sum = 0.0;
        for (std::size_t t = 0; t < n_states; ++t) {
          const double u = rng.next_double();
          const double keep = rng.next_double();
          row[t] = keep < clip_prob ? 0.0 : u;
          sum += row[t];
        }
      } while (sum == 0.0);
      for (std::size_t t = 0; t < n_states; ++t) row[t] /= sum;
    }
  }
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t a = 0; a < n_actions; ++a) mdp.reward.at(s, a) = rng.next_double();
  return mdp;
}

TabularMdp gridworld(std::size_t n, double gamma) {
  if (n < 2) throw std::invalid_argument("gridworld: need n >= 2");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("gridworld: gamma must lie in [0, 1)");

  const long edge = static_cast<long>(n) - 1;  // coordinates span [-edge, edge]
  const std::size_t side = 2 * n - 1;
  const std::size_t n_states = side * side;
  const std::size_t n_actions = 4;  // left, right, up, down

  auto index = [&](long x, long y) {
    return static_cast<std::size_t>(x + edge) * side + static_cast<std::size_t>(y + edge);
  };
  auto is_corner = [&](long x, long y) {
    return (x == edge || x == -edge) && (y == edge || y == -edge);
  };

  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.transition.assign(n_states * n_actions * n_states, 0.0);
  mdp.reward = Table(n_states, n_actions);
  mdp.initial.assign(n_states, 0.0);
  mdp.initial[index(0, 0)] = 1.0;
  mdp.generator = "gridworld";
  mdp.seed = n;

  static constexpr long kDx[4] = {-1, +1, 0, 0};
  static constexpr long kDy[4] = {0, 0, +1, -1};
  for (long x = -edge; x <= edge; ++x) {
    for (long y = -edge; y <= edge; ++y) {
      const std::size_t s = index(x, y);
      for (std::size_t a = 0; a < n_actions; ++a) {
        double* row = mdp.transition.data() + (s * n_actions + a) * n_states;
        if (is_corner(x, y)) {
          row[s] = 1.0;  // absorbing, no further reward
          continue;
        }
        long tx = x + kDx[a], ty = y + kDy[a];
        if (tx < -edge || tx > edge || ty < -edge || ty > edge) {
          tx = x;  // wall: stay put
          ty = y;
        }
        row[index(tx, ty)] = 1.0;
        if (is_corner(tx, ty)) mdp.reward.at(s, a) = 1.0;
      }
    }
  }
  return mdp;
}

QFn q_from_v(const TabularMdp& mdp, std::span<const double> v) {
  if (v.size() != mdp.n_states)
    throw std::invalid_argument("q_from_v: value function has " + std::to_string(v.size()) +
                                " entries, expected " + std::to_string(mdp.n_states));
  QFn q(mdp.n_states, mdp.n_actions);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const auto row = mdp.transition_row(s, a);
      double exp_v = 0.0;
      for (std::size_t t = 0; t < mdp.n_states; ++t) exp_v += row[t] * v[t];
      q.at(s, a) = mdp.reward.at(s, a) + mdp.gamma * exp_v;
    }
  }
  return q;
}

ValueFn v_from_q_policy(const Regularizer& reg, double lambda, const QFn& q,
                        const Policy& policy) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("v_from_q_policy: lambda must be finite and >= 0");
  if (q.rows != policy.rows || q.cols != policy.cols)
    throw std::invalid_argument("v_from_q_policy: Q is " + std::to_string(q.rows) + "x" +
                                std::to_string(q.cols) + " but policy is " +
                                std::to_string(policy.rows) + "x" +
                                std::to_string(policy.cols));
  ValueFn v(q.rows, 0.0);
  for (std::size_t s = 0; s < q.rows; ++s) {
    double acc = 0.0;
    for (std::size_t a = 0; a < q.cols; ++a) {
      const double p = policy.at(s, a);
      if (p <= 0.0) continue;  // 0 * phi(0) = 0 by convention
      double term = q.at(s, a);
      if (lambda > 0.0) term += lambda * reg.phi(std::min(p, 1.0));
      acc += p * term;
    }
    v[s] = acc;
  }
  return v;
}

Evaluation evaluate_policy_exact(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                                 const Policy& policy) {
  const std::size_t s_n = mdp.n_states, a_n = mdp.n_actions;
  if (policy.rows != s_n || policy.cols != a_n)
    throw std::invalid_argument("evaluate_policy_exact: policy shape mismatch");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("evaluate_policy_exact: lambda must be finite and >= 0");

  const auto n = static_cast<Eigen::Index>(s_n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (std::size_t s = 0; s < s_n; ++s) {
    double r_pi = 0.0;
    for (std::size_t a = 0; a < a_n; ++a) {
      const double p = policy.at(s, a);
      if (p <= 0.0) continue;
      double term = mdp.reward.at(s, a);
      if (lambda > 0.0) term += lambda * reg.phi(std::min(p, 1.0));
      r_pi += p * term;
      const auto row = mdp.transition_row(s, a);
      for (std::size_t t = 0; t < s_n; ++t)
        m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) -= mdp.gamma * p * row[t];
    }
    b(static_cast<Eigen::Index>(s)) = r_pi;
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Eigen::VectorXd x = lu.solve(b);
  // One step of iterative refinement pushes the residual to rounding level.
  x += lu.solve(b - m * x);
  const double resid = (b - m * x).lpNorm<Eigen::Infinity>();
  if (!std::isfinite(resid) || resid > 1e-8 * (1.0 + b.lpNorm<Eigen::Infinity>()))
    throw internal_inconsistency_error(
        "evaluate_policy_exact: linear solve residual " + std::to_string(resid));

  Evaluation out;
  out.v.assign(x.data(), x.data() + s_n);
  out.q = q_from_v(mdp, out.v);
  return out;
}

ValueFn evaluate_policy_iterative(const TabularMdp& mdp, const Regularizer& reg, double lambda,
                                  const Policy& policy, double tol, std::size_t max_iter) {
  const std::size_t s_n = mdp.n_states, a_n = mdp.n_actions;
  if (policy.rows != s_n || policy.cols != a_n)
    throw std::invalid_argument("evaluate_policy_iterative: policy shape mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("evaluate_policy_iterative: tol must be > 0");

  QFn q(s_n, a_n, 0.0);
  double delta = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const ValueFn v = v_from_q_policy(reg, lambda, q, policy);
    delta = 0.0;
    for (std::size_t s = 0; s < s_n; ++s) {
      for (std::size_t a = 0; a < a_n; ++a) {
        const auto row = mdp.transition_row(s, a);
        double exp_v = 0.0;
        for (std::size_t t = 0; t < s_n; ++t) exp_v += row[t] * v[t];
        const double next = mdp.reward.at(s, a) + mdp.gamma * exp_v;
        delta = std::max(delta, std::abs(next - q.at(s, a)));
        q.at(s, a) = next;
      }
    }
    if (delta < tol) return v_from_q_policy(reg, lambda, q, policy);
  }
  throw convergence_error("evaluate_policy_iterative: still changing after max_iter sweeps",
                          delta, max_iter);
}

}  // namespace regmdp
