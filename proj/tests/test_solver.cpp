#include "regmdp/solver.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "regmdp/errors.hpp"
#include "regmdp/projection.hpp"
#include "regmdp/rng.hpp"
#include "support.hpp"

using namespace regmdp;

namespace {

TabularMdp one_state(std::vector<double> rewards, double gamma) {
  TabularMdp m;
  m.n_states = 1;
  m.n_actions = rewards.size();
  m.transition.assign(m.n_actions, 1.0);
  m.reward = Table(1, m.n_actions);
  for (std::size_t a = 0; a < m.n_actions; ++a) m.reward.at(0, a) = rewards[a];
  m.gamma = gamma;
  m.initial = {1.0};
  return m;
}

ValueFn random_values(SplitMix64& rng, std::size_t n, double lo, double hi) {
  ValueFn v(n);
  for (double& x : v) x = rng.next_double(lo, hi);
  return v;
}

double sup_diff(const ValueFn& a, const ValueFn& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("backup at lambda = 0 is the row max with lowest-index ties") {
  const auto m = one_state({1.0, 0.0}, 0.5);
  Policy pi;
  std::vector<double> mu;
  const auto tv = bellman_operator(m, Regularizer::shannon(), 0.0, ValueFn{0.0}, &pi, &mu);
  CHECK(tv == ValueFn{1.0});
  CHECK(pi.at(0, 0) == 1.0);
  CHECK(pi.at(0, 1) == 0.0);
  CHECK(mu[0] == 1.0);

  const auto tie = one_state({0.7, 0.7, 0.7}, 0.5);
  Policy pi2;
  bellman_operator(tie, Regularizer::shannon(), 0.0, ValueFn{0.0}, &pi2);
  CHECK(pi2.at(0, 0) == 1.0);
  CHECK(pi2.at(0, 1) == 0.0);
  CHECK(pi2.at(0, 2) == 0.0);
}

TEST_CASE("backup with the entropy bonus on equal rewards") {
  const double c = 0.3;
  const auto m = one_state({c, c}, 0.5);
  const auto tv = bellman_operator(m, Regularizer::shannon(), 1.0, ValueFn{0.0});
  CHECK(tv[0] == doctest::Approx(c + std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("backup argument checking") {
  const auto m = one_state({1.0}, 0.5);
  CHECK_THROWS_AS(bellman_operator(m, Regularizer::shannon(), 1.0, ValueFn{0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(bellman_operator(m, Regularizer::shannon(), -1.0, ValueFn{0.0}),
                  std::invalid_argument);
}

TEST_CASE("regularized backup is squeezed between the hard max and its bonus shift") {
  const auto m = random_mdp(20, 5, 0.9, 0.5, 11);
  SplitMix64 rng(100);
  for (const auto& [name, reg] : testsupport::seven_regularizers()) {
    CAPTURE(name);
    for (double lambda : {0.01, 1.0}) {
      for (int trial = 0; trial < 25; ++trial) {
        const auto v = random_values(rng, m.n_states, -10.0, 10.0);
        const auto hard = bellman_operator(m, reg, 0.0, v);
        const auto soft = bellman_operator(m, reg, lambda, v);
        const double shift = lambda * reg.phi(1.0 / static_cast<double>(m.n_actions));
        for (std::size_t s = 0; s < m.n_states; ++s) {
          CHECK(soft[s] >= hard[s] - 1e-10);
          CHECK(soft[s] <= hard[s] + shift + 1e-10);
        }
      }
    }
  }
}

TEST_CASE("backup is a gamma contraction, monotone, and shifts by gamma c") {
  const auto m = random_mdp(20, 5, 0.9, 0.5, 11);
  SplitMix64 rng(200);
  for (const auto& [name, reg] : testsupport::seven_regularizers()) {
    CAPTURE(name);
    for (double lambda : {0.01, 1.0}) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto v1 = random_values(rng, m.n_states, -10.0, 10.0);
        auto v2 = random_values(rng, m.n_states, -10.0, 10.0);
        const auto t1 = bellman_operator(m, reg, lambda, v1);
        const auto t2 = bellman_operator(m, reg, lambda, v2);
        CHECK(sup_diff(t1, t2) <= m.gamma * sup_diff(v1, v2) + 1e-12);

        // Ordered pair: raise v1 entrywise.
        for (std::size_t s = 0; s < m.n_states; ++s)
          v2[s] = v1[s] + std::abs(v2[s]);
        const auto t_hi = bellman_operator(m, reg, lambda, v2);
        for (std::size_t s = 0; s < m.n_states; ++s) CHECK(t_hi[s] >= t1[s] - 1e-10);

        const double c = rng.next_double(-5.0, 5.0);
        ValueFn shifted = v1;
        for (double& x : shifted) x += c;
        const auto t_shift = bellman_operator(m, reg, lambda, shifted);
        for (std::size_t s = 0; s < m.n_states; ++s)
          CHECK(std::abs(t_shift[s] - (t1[s] + m.gamma * c)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("value iteration solves hand-checked fixed points") {
  const auto loop = one_state({1.0}, 0.5);
  const auto plain = value_iterate(loop, Regularizer::shannon(), 0.0);
  CHECK(plain.v_star[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(plain.policy.at(0, 0) == 1.0);

  const auto sym = one_state({1.0, 1.0}, 0.5);
  const auto soft = value_iterate(sym, Regularizer::shannon(), 1.0);
  CHECK(soft.v_star[0] == doctest::Approx(2.0 * (1.0 + std::log(2.0))).epsilon(1e-9));
  CHECK(soft.policy.at(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("value iteration residuals decay at rate gamma") {
  const auto m = random_mdp(15, 4, 0.9, 0.4, 17);
  const auto reg = Regularizer::shannon();
  ValueFn v(m.n_states, 0.0);
  double prev_resid = -1.0;
  for (int it = 0; it < 12; ++it) {
    const auto next = bellman_operator(m, reg, 0.5, v);
    const double resid = sup_diff(next, v);
    if (it > 0) CHECK(resid <= m.gamma * prev_resid + 1e-12);
    prev_resid = resid;
    v = next;
  }
}

TEST_CASE("returned solutions are self-consistent") {
  const auto m = random_mdp(10, 4, 0.9, 0.5, 5);
  const auto reg = Regularizer::tsallis(0.5, 2.0);
  const double lambda = 0.1, tol = 1e-8;
  const auto sol = value_iterate(m, reg, lambda, tol);

  CHECK(sol.iterations > 1);
  CHECK(sol.final_residual < tol);
  REQUIRE(sol.v_star.size() == m.n_states);
  REQUIRE(sol.mu.size() == m.n_states);
  for (std::size_t s = 0; s < m.n_states; ++s) {
    const auto q_row = sol.q_star.row(s);
    const auto proj = project(reg, q_row, lambda);
    CHECK(std::abs(sol.v_star[s] - proj.value) <= 1e-8);
    CHECK(std::abs(sol.mu[s] - proj.mu) <= 1e-8);
    for (std::size_t a = 0; a < m.n_actions; ++a)
      CHECK(std::abs(sol.policy.at(s, a) - proj.pi[a]) <= 1e-8);
  }

  // Fixed point: one more backup moves v_star by at most 10 tol.
  const auto again = bellman_operator(m, reg, lambda, sol.v_star);
  CHECK(sup_diff(again, sol.v_star) <= 10.0 * tol);
}

TEST_CASE("value iteration reports non-convergence") {
  const auto m = random_mdp(5, 3, 0.9, 0.0, 2);
  try {
    value_iterate(m, Regularizer::shannon(), 0.5, 1e-10, 3);
    FAIL("expected convergence_error");
  } catch (const convergence_error& e) {
    CHECK(e.iterations == 3);
    CHECK(e.residual > 1e-10);
  }
  CHECK_THROWS_AS(value_iterate(m, Regularizer::shannon(), 0.5, 0.0, 10),
                  std::invalid_argument);
}

TEST_CASE("policy iteration stops immediately when uniform is optimal") {
  const auto sym = one_state({1.0, 1.0}, 0.5);
  const auto sol = rpi(sym, Regularizer::shannon(), 1.0);
  CHECK(sol.iterations <= 2);
  CHECK(sol.policy.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol.v_star[0] == doctest::Approx(2.0 * (1.0 + std::log(2.0))).epsilon(1e-10));
}

TEST_CASE("policy iteration agrees with value iteration") {
  struct Case {
    TabularMdp mdp;
    Regularizer reg;
    double lambda;
  };
  const Case cases[] = {
      {random_mdp(12, 4, 0.9, 0.3, 2), Regularizer::shannon(), 1.0},
      {random_mdp(50, 10, 0.99, 0.95, 7), Regularizer::tsallis(0.5, 2.0), 0.1},
  };
  for (const auto& c : cases) {
    std::vector<double> trace;
    const auto pi_sol = rpi(c.mdp, c.reg, c.lambda, 1e-8, 500, std::nullopt, &trace);
    const auto vi_sol = value_iterate(c.mdp, c.reg, c.lambda, 1e-8);
    CHECK(sup_diff(pi_sol.v_star, vi_sol.v_star) < 1e-6);
    // Each evaluation round improved Q everywhere, up to solve noise.
    REQUIRE(!trace.empty());
    for (double worst : trace) CHECK(worst >= -1e-10);
  }
}

TEST_CASE("policy iteration seeded initialization is reproducible") {
  const auto m = random_mdp(8, 3, 0.9, 0.2, 4);
  const auto reg = Regularizer::shannon();
  const auto a = rpi(m, reg, 0.5, 1e-8, 500, 42);
  const auto b = rpi(m, reg, 0.5, 1e-8, 500, 42);
  CHECK(a.v_star == b.v_star);
  CHECK(a.policy.v == b.policy.v);

  const auto c = rpi(m, reg, 0.5);
  CHECK(sup_diff(a.v_star, c.v_star) < 1e-6);  // same optimum from any start
}

TEST_CASE("policy iteration argument checking") {
  const auto m = one_state({1.0}, 0.5);
  CHECK_THROWS_AS(rpi(m, Regularizer::shannon(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rpi(m, Regularizer::shannon(), 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("unregularized solver matches the zero-lambda path bitwise") {
  const auto m = random_mdp(9, 4, 0.9, 0.4, 6);
  const auto a = solve_unregularized(m);
  const auto b = value_iterate(m, Regularizer::tsallis(2.0, 3.0), 0.0);
  CHECK(a.v_star == b.v_star);
  CHECK(a.q_star.v == b.q_star.v);
  CHECK(a.policy.v == b.policy.v);
  CHECK(a.mu == b.mu);
  CHECK(a.iterations == b.iterations);

  for (std::size_t s = 0; s < m.n_states; ++s) {
    std::size_t ones = 0;
    for (std::size_t act = 0; act < m.n_actions; ++act)
      ones += (a.policy.at(s, act) == 1.0);
    CHECK(ones == 1);
  }
}

TEST_CASE("unregularized grid values follow the shortest path to a corner") {
  const std::size_t n = 5;
  const double gamma = 0.99;
  const auto m = gridworld(n, gamma);
  const auto sol = solve_unregularized(m, 1e-10);

  const long edge = 4;
  const std::size_t side = 2 * n - 1;
  for (long x = -edge; x <= edge; ++x) {
    for (long y = -edge; y <= edge; ++y) {
      const std::size_t s =
          static_cast<std::size_t>(x + edge) * side + static_cast<std::size_t>(y + edge);
      const long dist = (edge - std::labs(x)) + (edge - std::labs(y));
      const double expect = dist == 0 ? 0.0 : std::pow(gamma, static_cast<double>(dist - 1));
      CHECK(sol.v_star[s] == doctest::Approx(expect).epsilon(1e-8));
    }
  }
}
