#include "regmdp/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "regmdp/errors.hpp"

namespace regmdp {

namespace {

constexpr double kSupportSnap = 1e-9;  // sparse entries below this become exact zeros
constexpr double kResidualTol = 1e-13;
constexpr double kKinkBand = 1e-9;
// Below this, phi' and x^2 leave double range; such entries change nothing
// at any tolerance we check, so derivative-based diagnostics skip them.
constexpr double kDerivativeFloor = 1e-154;

void validate_inputs(std::span<const double> q_row, double lambda) {
  if (q_row.empty()) throw std::invalid_argument("project: empty Q row");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("project: lambda must be finite and > 0");
  for (double q : q_row)
    if (!std::isfinite(q)) throw std::invalid_argument("project: non-finite Q entry");
}

struct Residual {
  double h;   // sum of probabilities minus 1
  double dh;  // d/dmu of that sum; 0 contributions from clamped entries
};

// Entries whose probability falls below this floor shift the normalization
// sum by under n * 1e-16, invisible to every residual and value tolerance,
// so the mu search skips their divergent-branch inversions. Policy rows are
// still assembled with full inversions and keep their positive tail entries.
constexpr double kResidualGateX = 1e-16;

double residual_gate(const Regularizer& reg) {
  return reg.f_prime_unchecked(kResidualGateX);
}

Residual eval_residual(const Regularizer& reg, std::span<const double> q_row, double lambda,
                       double mu, const std::vector<char>* support = nullptr,
                       double gate = std::numeric_limits<double>::infinity()) {
  double h = -1.0, dh = 0.0;
  for (std::size_t a = 0; a < q_row.size(); ++a) {
    if (support && !(*support)[a]) continue;
    const double y = (mu - q_row[a]) / lambda;
    if (y >= gate) continue;
    const double x = reg.g(y);
    h += x;
    if (x > 1e-12 && x < 1.0 - 1e-12) {
      const double curv = reg.f_double_prime_unchecked(x);
      if (std::isfinite(curv) && curv < 0.0) dh += 1.0 / (lambda * curv);
    }
  }
  return {h, dh};
}

// Root of the normalization residual. The residual is strictly decreasing
// and >= 0 at the lower bracket end (the best action alone reaches
// probability 1 there). When f' stays bounded at 0 the upper end is exact;
// otherwise the loop marches right geometrically until the residual goes
// negative, then bisection cannot miss. Newton steps accelerate whenever
// they stay inside the bracket, with a forced bisection every third round
// so kink plateaus cannot stall progress.
double solve_mu(const Regularizer& reg, std::span<const double> q_row, double lambda,
                const double* hint) {
  const FPrimeBoundary bd = reg.f_prime_boundary();
  const double gate = residual_gate(reg);
  const double q_max = *std::max_element(q_row.begin(), q_row.end());

  double lo = q_max + lambda * bd.at_one;
  double hi = std::isfinite(bd.at_zero) ? q_max + lambda * bd.at_zero
                                        : std::numeric_limits<double>::infinity();
  double step = lambda * (std::abs(bd.at_one) + 1.0);

  double mu = lo;
  if (hint && std::isfinite(*hint)) mu = std::clamp(*hint, lo, hi);
  for (int it = 0; it < 500; ++it) {
    const Residual r = eval_residual(reg, q_row, lambda, mu, nullptr, gate);
    if (std::abs(r.h) < kResidualTol) return mu;
    if (r.h > 0.0)
      lo = mu;
    else
      hi = mu;
    if (hi - lo < 1e-13 * (1.0 + std::abs(mu))) return 0.5 * (lo + hi);
    double next = std::numeric_limits<double>::quiet_NaN();
    if (it % 3 != 2 && r.dh < 0.0) next = mu - r.h / r.dh;
    if (std::isinf(hi)) {
      if (!(next > lo)) {
        next = lo + step;
        step *= 2.0;
      }
      mu = next;
      continue;
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    mu = next;
  }
  return mu;
}

// A few Newton corrections for mu after support entries were snapped away, so
// the surviving entries sum to 1 again without rescaling them off the
// stationarity curve.
double repolish_mu(const Regularizer& reg, std::span<const double> q_row, double lambda,
                   double mu, const std::vector<char>& support) {
  const double gate = residual_gate(reg);
  double best_mu = mu;
  double best_abs = std::abs(eval_residual(reg, q_row, lambda, mu, &support, gate).h);
  for (int it = 0; it < 6 && best_abs >= kResidualTol; ++it) {
    const Residual r = eval_residual(reg, q_row, lambda, mu, &support, gate);
    if (!(r.dh < 0.0)) break;
    mu -= r.h / r.dh;
    if (!std::isfinite(mu)) break;
    const double now = std::abs(eval_residual(reg, q_row, lambda, mu, &support, gate).h);
    if (now < best_abs) {
      best_abs = now;
      best_mu = mu;
    } else {
      break;
    }
  }
  return best_mu;
}

double objective(const Regularizer& reg, std::span<const double> q_row, double lambda,
                 std::span<const double> pi) {
  double v = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a)
    if (pi[a] > 0.0) v += pi[a] * (q_row[a] + lambda * reg.phi(std::min(pi[a], 1.0)));
  return v;
}

ProjectionResult project_impl(const Regularizer& reg, std::span<const double> q_row,
                              double lambda, const double* hint) {
  validate_inputs(q_row, lambda);

  ProjectionResult out;
  out.mu = solve_mu(reg, q_row, lambda, hint);

  const std::size_t n = q_row.size();
  out.pi.resize(n);
  for (std::size_t a = 0; a < n; ++a) out.pi[a] = reg.g((out.mu - q_row[a]) / lambda);

  if (reg.induces_sparsity()) {
    std::vector<char> support(n, 1);
    bool snapped = false;
    for (std::size_t a = 0; a < n; ++a)
      if (out.pi[a] < kSupportSnap) {
        support[a] = 0;
        snapped = out.pi[a] > 0.0 || snapped;
        out.pi[a] = 0.0;
      }
    if (snapped) {
      out.mu = repolish_mu(reg, q_row, lambda, out.mu, support);
      for (std::size_t a = 0; a < n; ++a)
        if (support[a]) out.pi[a] = reg.g((out.mu - q_row[a]) / lambda);
    }
  }

  const double sum = std::accumulate(out.pi.begin(), out.pi.end(), 0.0);
  out.support_size = 0;
  for (double& x : out.pi) {
    x /= sum;
    if (x > 0.0) ++out.support_size;
  }
  out.value = objective(reg, q_row, lambda, out.pi);
  return out;
}

struct TwoForms {
  double direct;
  double dual;
};

// Form (ii) needs phi'(pi). At a min() branch crossing phi' does not exist;
// stationarity instead pins x * (subgradient) to (mu - q)/lambda - phi(x),
// which is what the dual form actually consumes, so that ratio stands in.
TwoForms both_value_forms(const Regularizer& reg, std::span<const double> q_row, double lambda,
                          const ProjectionResult& result) {
  if (result.pi.size() != q_row.size())
    throw std::invalid_argument("regularized_value: result size mismatch");
  const FPrimeBoundary bd = reg.f_prime_boundary();
  const std::vector<double> kinks = reg.crossings();

  double bonus = 0.0;
  for (std::size_t a = 0; a < result.pi.size(); ++a) {
    const double x = result.pi[a];
    if (x < kDerivativeFloor) continue;
    double slope;
    if (x >= 1.0) {
      slope = bd.at_one;  // phi'(1-), since f'(1-) = phi(1) + phi'(1-) and phi(1) = 0
    } else {
      bool at_kink = false;
      for (double c : kinks) at_kink = at_kink || std::abs(x - c) <= kKinkBand;
      if (at_kink)
        slope = ((result.mu - q_row[a]) / lambda - reg.phi(x)) / x;
      else
        slope = reg.phi_prime_unchecked(x);
    }
    bonus += x * x * slope;
  }
  return {objective(reg, q_row, lambda, result.pi), result.mu - lambda * bonus};
}

}  // namespace

ProjectionResult project(const Regularizer& reg, std::span<const double> q_row, double lambda) {
  return project_impl(reg, q_row, lambda, nullptr);
}

ProjectionResult project(const Regularizer& reg, std::span<const double> q_row, double lambda,
                         double mu_hint) {
  return project_impl(reg, q_row, lambda, &mu_hint);
}

double normalization_residual(const Regularizer& reg, std::span<const double> q_row,
                              double lambda, double mu) {
  validate_inputs(q_row, lambda);
  return eval_residual(reg, q_row, lambda, mu).h;
}

double regularized_value(const Regularizer& reg, std::span<const double> q_row, double lambda,
                         const ProjectionResult& result) {
  const TwoForms v = both_value_forms(reg, q_row, lambda, result);
  if (std::abs(v.direct - v.dual) > 1e-9 * std::max(1.0, std::abs(v.direct)))
    throw internal_inconsistency_error(
        "regularized_value: objective form " + std::to_string(v.direct) +
        " disagrees with multiplier form " + std::to_string(v.dual));
  return v.direct;
}

double value_form_gap(const Regularizer& reg, std::span<const double> q_row, double lambda,
                      const ProjectionResult& result) {
  const TwoForms v = both_value_forms(reg, q_row, lambda, result);
  return std::abs(v.direct - v.dual);
}

double kkt_residual(const Regularizer& reg, std::span<const double> q_row, double lambda,
                    const ProjectionResult& result) {
  if (result.pi.size() != q_row.size())
    throw std::invalid_argument("kkt_residual: result size mismatch");
  const FPrimeBoundary bd = reg.f_prime_boundary();
  const std::vector<double> kinks = reg.crossings();

  double worst = 0.0;
  for (std::size_t a = 0; a < result.pi.size(); ++a) {
    const double x = result.pi[a];
    if (x <= 0.0) {
      if (std::isfinite(bd.at_zero))
        worst = std::max(worst, std::max(0.0, q_row[a] + lambda * bd.at_zero - result.mu));
      continue;
    }
    if (x < kDerivativeFloor) continue;
    if (x >= 1.0) {
      worst = std::max(worst, std::abs(q_row[a] + lambda * bd.at_one - result.mu));
      continue;
    }
    const double* kink = nullptr;
    for (const double& c : kinks)
      if (std::abs(x - c) <= kKinkBand) kink = &c;
    if (kink) {
      const double fl = reg.f_prime_unchecked(std::max(*kink - 1e-11, 1e-12));
      const double fr = reg.f_prime_unchecked(std::min(*kink + 1e-11, 1.0 - 1e-12));
      const double y = (result.mu - q_row[a]) / lambda;
      const double pad = 1e-8 * (1.0 + std::abs(y));
      const double outside =
          std::max(0.0, std::max(y - std::max(fl, fr) - pad, std::min(fl, fr) - pad - y));
      worst = std::max(worst, lambda * outside);
    } else {
      worst = std::max(worst,
                       std::abs(q_row[a] + lambda * reg.f_prime_unchecked(x) - result.mu));
    }
  }
  return worst;
}

namespace {

// Euclidean projection onto the probability simplex (sort-and-threshold).
std::vector<double> simplex_euclidean(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  std::vector<double> x(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) x[i] = std::max(v[i] - tau, 0.0);
  return x;
}

std::vector<double> gradient_ascent(const Regularizer& reg, std::span<const double> q_row,
                                    double lambda, std::vector<double> p, std::size_t iters) {
  const std::size_t n = q_row.size();
  std::vector<double> best = p;
  double best_obj = objective(reg, q_row, lambda, p);
  std::vector<double> step(n);
  for (std::size_t t = 0; t < iters; ++t) {
    const double eta = 1.0 / (static_cast<double>(t) + 10.0);
    for (std::size_t a = 0; a < n; ++a) {
      const double x = std::clamp(p[a], 1e-16, 1.0 - 1e-16);
      step[a] = p[a] + eta * (q_row[a] + lambda * reg.f_prime_unchecked(x));
    }
    p = simplex_euclidean(step);
    const double obj = objective(reg, q_row, lambda, p);
    if (obj > best_obj) {
      best_obj = obj;
      best = p;
    }
  }
  return best;
}

// Enumerates compositions of r into n parts (the barycentric grid) and keeps
// the best objective.
void grid_best(const Regularizer& reg, std::span<const double> q_row, double lambda,
               std::size_t resolution, std::vector<double>& point, std::size_t index,
               std::size_t left, std::vector<double>& best, double& best_obj) {
  const std::size_t n = q_row.size();
  if (index == n - 1) {
    point[index] = static_cast<double>(left) / static_cast<double>(resolution);
    const double obj = objective(reg, q_row, lambda, point);
    if (obj > best_obj) {
      best_obj = obj;
      best = point;
    }
    return;
  }
  for (std::size_t c = 0; c <= left; ++c) {
    point[index] = static_cast<double>(c) / static_cast<double>(resolution);
    grid_best(reg, q_row, lambda, resolution, point, index + 1, left - c, best, best_obj);
  }
}

// Dense re-grid of a box around the current best, first n-1 coordinates free.
void refine_box(const Regularizer& reg, std::span<const double> q_row, double lambda,
                double window, std::size_t steps, std::vector<double>& best, double& best_obj) {
  const std::size_t n = q_row.size();
  const std::vector<double> center = best;
  std::vector<std::size_t> idx(n - 1, 0);
  std::vector<double> point(n);
  while (true) {
    double sum = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n - 1 && ok; ++i) {
      const double frac = static_cast<double>(idx[i]) / static_cast<double>(steps);
      point[i] = center[i] + window * (2.0 * frac - 1.0);
      if (point[i] < 0.0) {
        if (point[i] < -window * 2.0 / static_cast<double>(steps)) ok = false;
        point[i] = 0.0;
      }
      sum += point[i];
    }
    if (ok && sum <= 1.0 + 1e-12) {
      point[n - 1] = std::max(1.0 - sum, 0.0);
      const double obj = objective(reg, q_row, lambda, point);
      if (obj > best_obj) {
        best_obj = obj;
        best = point;
      }
    }
    std::size_t i = 0;
    while (i < n - 1 && ++idx[i] > steps) idx[i++] = 0;
    if (i == n - 1) break;
  }
}

}  // namespace

std::vector<double> brute_force_project(const Regularizer& reg, std::span<const double> q_row,
                                        double lambda, std::size_t resolution) {
  validate_inputs(q_row, lambda);
  if (resolution < 2) throw std::invalid_argument("brute_force_project: resolution < 2");
  const std::size_t n = q_row.size();

  if (n > 4) {
    std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    return gradient_ascent(reg, q_row, lambda, std::move(uniform), 100000);
  }

  std::vector<double> point(n), best(n, 0.0);
  double best_obj = -std::numeric_limits<double>::infinity();
  grid_best(reg, q_row, lambda, resolution, point, 0, resolution, best, best_obj);

  if (n > 1) {
    const std::size_t steps = n == 2 ? 400 : (n == 3 ? 100 : 24);
    double window = 10.0 / static_cast<double>(resolution);
    for (int round = 0; round < 2; ++round) {
      refine_box(reg, q_row, lambda, window, steps, best, best_obj);
      window *= 20.0 / static_cast<double>(steps);
    }
  }
  return best;
}

}  // namespace regmdp
