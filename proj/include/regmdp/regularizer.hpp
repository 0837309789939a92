#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace regmdp {

namespace detail {
struct RegNode;
}

/// Limits of f'(x) = phi(x) + x phi'(x) at the ends of (0, 1).
/// at_zero may be +infinity; at_one is always finite.
struct FPrimeBoundary {
  double at_zero;
  double at_one;
};

/// A policy regularizer phi on (0, 1] with phi(1) = 0, phi non-increasing
/// and x * phi(x) strictly concave. Instances are immutable values; every
/// constructor validates its parameters and then audits the resulting
/// function numerically (monotonicity, strict concavity through f',
/// vanishing of x*phi(x) at 0), rejecting anything that fails.
///
/// Built-in families:
///   shannon            -log x
///   tsallis{k,q}       k/(q-1) * (1 - x^(q-1)),   k > 0, q > 0, q != 1
///   cosine{theta}      cos(theta x) - cos(theta), theta in (0, pi/2]
///   sine{theta}        sin(theta) - sin(theta x), theta in (0, pi/2]
///   exponential{k,q}   q - x^k q^x,               k >= 0, q >= 1
/// plus weighted sums and pointwise minima of the above.
class Regularizer {
public:
  static Regularizer shannon();
  static Regularizer tsallis(double k, double q);
  static Regularizer cosine(double theta);
  static Regularizer sine(double theta);
  static Regularizer exponential(double k, double q);
  /// Weighted sum of sub-regularizers. Weights must be >= 0 with at least
  /// one strictly positive; zero-weight terms are dropped.
  static Regularizer weighted_sum(std::vector<std::pair<double, Regularizer>> terms);
  /// Pointwise minimum of two regularizers. Branch-crossing points in (0, 1)
  /// are located at construction; derivatives are refused within 1e-9 of one.
  static Regularizer min_of(const Regularizer& a, const Regularizer& b);

  /// Parses the textual grammar, ignoring whitespace:
  ///   shannon | tsallis:k=<f>,q=<f> | cos:theta=<f> | sin:theta=<f>
  ///   | exp:k=<f>,q=<f> | sum(<w>*<spec>+<w>*<spec>+...) | min(<spec>,<spec>)
  static Regularizer parse(std::string_view text);

  /// Canonical rendering; parse(to_string()) reproduces the same function.
  std::string to_string() const;

  /// phi(x) for x in (0, 1].
  double phi(double x) const;

  /// phi'(x) for x in (0, 1). Throws non_differentiable_error within 1e-9
  /// of a min() branch crossing.
  double phi_prime(double x) const;

  /// f'(x) = phi(x) + x phi'(x) for x in (0, 1), the derivative of x*phi(x).
  /// Strictly decreasing. Same differentiability guard as phi_prime.
  double f_prime(double x) const;

  /// One-sided limits of f' at 0 and 1, evaluated analytically per family.
  FPrimeBoundary f_prime_boundary() const;

  /// Inverse of f', total over the reals: y >= f'(0+) gives 0,
  /// y <= f'(1-) gives 1, otherwise the unique x with f'(x) = y.
  double g(double y) const;

  /// Like g but always takes the bracketed numeric inversion, bypassing the
  /// closed forms used for shannon and tsallis q=2. Exists so tests can
  /// check the closed forms against the generic path.
  double g_numeric(double y) const;

  /// True when f'(0+) is finite, i.e. projections through this regularizer
  /// can assign exactly zero probability.
  bool induces_sparsity() const;

  /// Sum of p(i) * phi(p(i)) over a probability vector, with 0 * phi(0) = 0.
  /// Maximized by the uniform distribution at value phi(1/n).
  double entropy_like(std::span<const double> p) const;

  /// All min() branch-crossing points in the expression, ascending.
  std::vector<double> crossings() const;

  /// Derivatives without the kink guard: at a crossing the branch active
  /// immediately to the left is used. Intended for root-finding internals.
  double phi_prime_unchecked(double x) const;
  double f_prime_unchecked(double x) const;
  double f_double_prime_unchecked(double x) const;

private:
  explicit Regularizer(std::shared_ptr<const detail::RegNode> node);
  std::shared_ptr<const detail::RegNode> node_;
  friend struct detail::RegNode;
};

}  // namespace regmdp
