#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "regmdp/regularizer.hpp"
#include "regmdp/rng.hpp"

namespace testsupport {

inline double half_pi() { return std::acos(-1.0) / 2.0; }

/// The seven regularizers exercised throughout the experiment suite.
inline const std::vector<std::pair<std::string, regmdp::Regularizer>>& seven_regularizers() {
  using R = regmdp::Regularizer;
  static const std::vector<std::pair<std::string, R>> v = {
      {"shannon", R::shannon()},
      {"tsallis", R::tsallis(0.5, 2.0)},
      {"cos", R::cosine(half_pi())},
      {"exp", R::exponential(0.0, std::exp(1.0))},
      {"min", R::min_of(R::shannon(), R::tsallis(2.0, 2.0))},
      {"poly", R::weighted_sum({{1.0, R::tsallis(0.5, 2.0)}, {1.0, R::tsallis(2.0, 3.0)}})},
      {"mix", R::weighted_sum({{1.0, R::shannon()}, {1.0, R::tsallis(0.5, 2.0)}})},
  };
  return v;
}

inline std::vector<double> random_simplex(regmdp::SplitMix64& rng, std::size_t n) {
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) {
    x = -std::log(1.0 - rng.next_double());
    s += x;
  }
  for (auto& x : p) x /= s;
  return p;
}

/// Euclidean projection onto the probability simplex by sorting, i.e. the
/// sparsemax closed form max(z - tau(z), 0). Written independently of the
/// library so the two can check each other.
inline std::vector<double> sparsemax(const std::vector<double>& z) {
  std::vector<double> u(z);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] > t) tau = t;
  }
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = std::max(z[i] - tau, 0.0);
  return x;
}

/// softmax(q / lambda) with max subtraction.
inline std::vector<double> softmax(const std::vector<double>& q, double lambda) {
  const double m = *std::max_element(q.begin(), q.end());
  std::vector<double> x(q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    x[i] = std::exp((q[i] - m) / lambda);
    s += x[i];
  }
  for (auto& v : x) v /= s;
  return x;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return g;
}

}  // namespace testsupport
