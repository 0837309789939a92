#include "regmdp/regularizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "regmdp/errors.hpp"

namespace regmdp {
namespace detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kKinkGuard = 1e-9;      // derivative refusal band around a kink
constexpr double kInversionEps = 1e-12;  // open-interval margin for inverting f'
}  // namespace

struct RegNode {
  enum class Kind { shannon, tsallis, cosine, sine, exponential, sum, min };

  Kind kind;
  double a = 0.0;  // k for tsallis/exponential, theta for cosine/sine
  double b = 0.0;  // q for tsallis/exponential
  std::vector<std::pair<double, std::shared_ptr<const RegNode>>> terms;  // sum
  std::shared_ptr<const RegNode> left, right;                            // min
  std::vector<double> kinks;                                             // min

  static const RegNode& of(const Regularizer& r) { return *r.node_; }
};

using NodePtr = std::shared_ptr<const RegNode>;
using Kind = RegNode::Kind;

namespace {

double node_phi(const RegNode& n, double x);
double node_phi_prime(const RegNode& n, double x);        // unchecked
double node_phi_second(const RegNode& n, double x);       // unchecked
double node_f_prime(const RegNode& n, double x);          // unchecked
double node_f_second(const RegNode& n, double x);         // unchecked
FPrimeBoundary node_boundary(const RegNode& n);

// min() picks the branch with the smaller phi; exact ties go left.
const RegNode& active_branch(const RegNode& n, double x) {
  return node_phi(*n.left, x) <= node_phi(*n.right, x) ? *n.left : *n.right;
}

// Small integer exponents dominate in practice; skip the libm pow for them.
double ipow(double x, double e) {
  if (e == 0.0) return 1.0;
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == -1.0) return 1.0 / x;
  return std::pow(x, e);
}

double node_phi(const RegNode& n, double x) {
  switch (n.kind) {
    case Kind::shannon:
      return -std::log(x);
    case Kind::tsallis:
      return n.a / (n.b - 1.0) * (1.0 - ipow(x, n.b - 1.0));
    case Kind::cosine:
      return std::cos(n.a * x) - std::cos(n.a);
    case Kind::sine:
      return std::sin(n.a) - std::sin(n.a * x);
    case Kind::exponential:
      return n.b - std::pow(x, n.a) * std::pow(n.b, x);
    case Kind::sum: {
      double s = 0.0;
      for (const auto& [w, t] : n.terms) s += w * node_phi(*t, x);
      return s;
    }
    case Kind::min:
      return std::min(node_phi(*n.left, x), node_phi(*n.right, x));
  }
  return 0.0;
}

double node_phi_prime(const RegNode& n, double x) {
  switch (n.kind) {
    case Kind::shannon:
      return -1.0 / x;
    case Kind::tsallis:
      return -n.a * ipow(x, n.b - 2.0);
    case Kind::cosine:
      return -n.a * std::sin(n.a * x);
    case Kind::sine:
      return -n.a * std::cos(n.a * x);
    case Kind::exponential: {
      const double lq = std::log(n.b);
      const double qx = std::pow(n.b, x);
      const double xk = std::pow(x, n.a);
      const double dxk = n.a == 0.0 ? 0.0 : n.a * std::pow(x, n.a - 1.0);
      return -qx * (dxk + xk * lq);
    }
    case Kind::sum: {
      double s = 0.0;
      for (const auto& [w, t] : n.terms) s += w * node_phi_prime(*t, x);
      return s;
    }
    case Kind::min:
      return node_phi_prime(active_branch(n, x), x);
  }
  return 0.0;
}

double node_phi_second(const RegNode& n, double x) {
  switch (n.kind) {
    case Kind::shannon:
      return 1.0 / (x * x);
    case Kind::tsallis:
      return -n.a * (n.b - 2.0) * ipow(x, n.b - 3.0);
    case Kind::cosine:
      return -n.a * n.a * std::cos(n.a * x);
    case Kind::sine:
      return n.a * n.a * std::sin(n.a * x);
    case Kind::exponential: {
      const double lq = std::log(n.b);
      const double qx = std::pow(n.b, x);
      const double k = n.a;
      const double t0 = k == 0.0 ? 0.0 : k * (k - 1.0) * std::pow(x, k - 2.0);
      const double t1 = k == 0.0 ? 0.0 : 2.0 * k * lq * std::pow(x, k - 1.0);
      const double t2 = std::pow(x, k) * lq * lq;
      return -qx * (t0 + t1 + t2);
    }
    case Kind::sum: {
      double s = 0.0;
      for (const auto& [w, t] : n.terms) s += w * node_phi_second(*t, x);
      return s;
    }
    case Kind::min:
      return node_phi_second(active_branch(n, x), x);
  }
  return 0.0;
}

double node_f_prime(const RegNode& n, double x) {
  if (n.kind == Kind::min) return node_f_prime(active_branch(n, x), x);
  if (n.kind == Kind::sum) {
    double s = 0.0;
    for (const auto& [w, t] : n.terms) s += w * node_f_prime(*t, x);
    return s;
  }
  return node_phi(n, x) + x * node_phi_prime(n, x);
}

double node_f_second(const RegNode& n, double x) {
  if (n.kind == Kind::min) return node_f_second(active_branch(n, x), x);
  if (n.kind == Kind::sum) {
    double s = 0.0;
    for (const auto& [w, t] : n.terms) s += w * node_f_second(*t, x);
    return s;
  }
  return 2.0 * node_phi_prime(n, x) + x * node_phi_second(n, x);
}

FPrimeBoundary node_boundary(const RegNode& n) {
  switch (n.kind) {
    case Kind::shannon:
      return {kInf, -1.0};
    case Kind::tsallis:
      return {n.b > 1.0 ? n.a / (n.b - 1.0) : kInf, -n.a};
    case Kind::cosine:
      return {1.0 - std::cos(n.a), -n.a * std::sin(n.a)};
    case Kind::sine:
      return {std::sin(n.a), -n.a * std::cos(n.a)};
    case Kind::exponential:
      return {n.a > 0.0 ? n.b : n.b - 1.0, -n.a * n.b - n.b * std::log(n.b)};
    case Kind::sum: {
      double z = 0.0, o = 0.0;
      for (const auto& [w, t] : n.terms) {
        const FPrimeBoundary bd = node_boundary(*t);
        z += w * bd.at_zero;  // +inf propagates through any positive weight
        o += w * bd.at_one;
      }
      return {z, o};
    }
    case Kind::min: {
      // limits come from the branch active next to each endpoint
      const RegNode& near0 = active_branch(n, 1e-9);
      const RegNode& near1 = active_branch(n, 1.0 - 1e-9);
      return {node_boundary(near0).at_zero, node_boundary(near1).at_one};
    }
  }
  return {kInf, 0.0};
}

// phi' with the kink guard applied along the active evaluation path
double node_phi_prime_checked(const RegNode& n, double x) {
  if (n.kind == Kind::min) {
    for (double c : n.kinks)
      if (std::abs(x - c) < kKinkGuard)
        throw non_differentiable_error(
            "phi is not differentiable at the min() branch crossing near x=" + std::to_string(c),
            c);
    return node_phi_prime_checked(active_branch(n, x), x);
  }
  if (n.kind == Kind::sum) {
    double s = 0.0;
    for (const auto& [w, t] : n.terms) s += w * node_phi_prime_checked(*t, x);
    return s;
  }
  return node_phi_prime(n, x);
}

void collect_kinks(const RegNode& n, std::vector<double>& out) {
  if (n.kind == Kind::sum) {
    for (const auto& [w, t] : n.terms) collect_kinks(*t, out);
  } else if (n.kind == Kind::min) {
    out.insert(out.end(), n.kinks.begin(), n.kinks.end());
    collect_kinks(*n.left, out);
    collect_kinks(*n.right, out);
  }
}

// Locates sign changes of phi_a - phi_b on (0, 1) and bisects each to 1e-12.
// A single crossing is the expected case; any found are recorded.
std::vector<double> find_kinks(const RegNode& a, const RegNode& b) {
  std::vector<double> grid;
  for (int e = -9; e < -3; ++e)
    for (int m = 0; m < 4; ++m) grid.push_back(std::pow(10.0, e + 0.25 * m));
  const int lin = 4096;
  for (int i = 1; i <= lin; ++i) {
    const double x = static_cast<double>(i) / (lin + 1);
    if (x > grid.back()) grid.push_back(x);
  }

  auto diff = [&](double x) { return node_phi(a, x) - node_phi(b, x); };

  std::vector<double> kinks;
  double px = 0.0, pd = 0.0;
  bool have_prev = false;
  for (double x : grid) {
    const double d = diff(x);
    if (d == 0.0) continue;  // touches resolve by the neighboring signs
    if (have_prev && std::signbit(d) != std::signbit(pd)) {
      double lo = px, hi = x, dlo = pd;
      for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dm = diff(mid);
        if (dm == 0.0 || std::signbit(dm) == std::signbit(dlo)) {
          lo = mid;
          if (dm != 0.0) dlo = dm;
        } else {
          hi = mid;
        }
      }
      kinks.push_back(0.5 * (lo + hi));
    }
    px = x;
    pd = d;
    have_prev = true;
  }
  return kinks;
}

std::string describe(const RegNode& n);

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string describe(const RegNode& n) {
  switch (n.kind) {
    case Kind::shannon:
      return "shannon";
    case Kind::tsallis:
      return "tsallis:k=" + fmt_double(n.a) + ",q=" + fmt_double(n.b);
    case Kind::cosine:
      return "cos:theta=" + fmt_double(n.a);
    case Kind::sine:
      return "sin:theta=" + fmt_double(n.a);
    case Kind::exponential:
      return "exp:k=" + fmt_double(n.a) + ",q=" + fmt_double(n.b);
    case Kind::sum: {
      std::string s = "sum(";
      bool first = true;
      for (const auto& [w, t] : n.terms) {
        if (!first) s += "+";
        s += fmt_double(w) + "*" + describe(*t);
        first = false;
      }
      return s + ")";
    }
    case Kind::min:
      return "min(" + describe(*n.left) + "," + describe(*n.right) + ")";
  }
  return "";
}

// Numerical audit of the admissibility assumptions. Construction rejects
// any regularizer that fails; in particular sine{theta} with theta tan theta
// exceeding 2 loses concavity of x*phi(x) near 1 and is refused here even
// though the parameter range allows it.
std::vector<std::string> audit(const RegNode& n) {
  std::vector<std::string> bad;

  if (node_phi(n, 1.0) != 0.0) bad.push_back("phi(1) is not exactly 0");

  std::vector<double> mono_grid;
  for (int e = -9; e <= -4; ++e) mono_grid.push_back(std::pow(10.0, e));
  for (int i = 0; i <= 64; ++i) mono_grid.push_back(1e-3 + (1.0 - 1e-3) * i / 64.0);
  for (std::size_t i = 0; i + 1 < mono_grid.size(); ++i) {
    const double p0 = node_phi(n, mono_grid[i]);
    const double p1 = node_phi(n, mono_grid[i + 1]);
    if (p1 > p0 + 1e-12 * (1.0 + std::abs(p0))) {
      bad.push_back("phi increases between x=" + fmt_double(mono_grid[i]) + " and x=" +
                    fmt_double(mono_grid[i + 1]));
      break;
    }
  }

  // strict concavity of x*phi(x), checked through strict decrease of f'
  std::vector<double> fp_grid = {1e-6, 1e-4};
  for (int i = 0; i <= 60; ++i) fp_grid.push_back(1e-3 + (1.0 - 2e-3) * i / 60.0);
  fp_grid.push_back(1.0 - 1e-6);
  for (std::size_t i = 0; i + 1 < fp_grid.size(); ++i) {
    const double f0 = node_f_prime(n, fp_grid[i]);
    const double f1 = node_f_prime(n, fp_grid[i + 1]);
    if (!(f1 < f0)) {
      bad.push_back("f' fails to decrease strictly between x=" + fmt_double(fp_grid[i]) +
                    " and x=" + fmt_double(fp_grid[i + 1]) +
                    " (x*phi(x) is not strictly concave there)");
      break;
    }
  }

  // x*phi(x) must be nonnegative and shrink toward 0
  const double f6 = 1e-6 * node_phi(n, 1e-6);
  const double f9 = 1e-9 * node_phi(n, 1e-9);
  const double f12 = 1e-12 * node_phi(n, 1e-12);
  if (f6 < -1e-15 || f9 < -1e-15 || f12 < -1e-15)
    bad.push_back("x*phi(x) is negative near 0");
  if (f9 > f6 * (1.0 + 1e-9) + 1e-15 || f12 > f9 * (1.0 + 1e-9) + 1e-15)
    bad.push_back("x*phi(x) does not vanish as x approaches 0");

  return bad;
}

NodePtr checked(NodePtr n) {
  const std::vector<std::string> bad = audit(*n);
  if (!bad.empty()) {
    std::string msg = "inadmissible regularizer " + describe(*n) + ":";
    for (const auto& b : bad) msg += " " + b + ";";
    throw std::invalid_argument(msg);
  }
  return n;
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("bad " + std::string(what) + " in regularizer spec: '" +
                                std::string(s) + "'");
  return v;
}

// '+' inside a float exponent ("1e+3") is not a term separator
bool is_exponent_sign(std::string_view s, std::size_t i) {
  if (i < 2) return false;
  const char e = s[i - 1];
  if (e != 'e' && e != 'E') return false;
  const char d = s[i - 2];
  return (d >= '0' && d <= '9') || d == '.';
}

Regularizer parse_spec(std::string_view s);

std::pair<double, double> parse_kq(std::string_view s, std::string_view family) {
  const std::size_t comma = s.find(',');
  if (comma == std::string_view::npos || s.substr(0, 2) != "k=" ||
      s.substr(comma + 1, 2) != "q=")
    throw std::invalid_argument("expected k=<f>,q=<f> after '" + std::string(family) + ":'");
  return {parse_double(s.substr(2, comma - 2), "k"),
          parse_double(s.substr(comma + 3), "q")};
}

Regularizer parse_spec(std::string_view s) {
  if (s == "shannon") return Regularizer::shannon();
  if (s.starts_with("tsallis:")) {
    const auto [k, q] = parse_kq(s.substr(8), "tsallis");
    return Regularizer::tsallis(k, q);
  }
  if (s.starts_with("cos:theta=")) return Regularizer::cosine(parse_double(s.substr(10), "theta"));
  if (s.starts_with("sin:theta=")) return Regularizer::sine(parse_double(s.substr(10), "theta"));
  if (s.starts_with("exp:")) {
    const auto [k, q] = parse_kq(s.substr(4), "exp");
    return Regularizer::exponential(k, q);
  }
  if (s.starts_with("sum(") && s.ends_with(")")) {
    const std::string_view body = s.substr(4, s.size() - 5);
    std::vector<std::pair<double, Regularizer>> terms;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i < body.size()) {
        if (body[i] == '(') ++depth;
        if (body[i] == ')') --depth;
        if (!(body[i] == '+' && depth == 0 && !is_exponent_sign(body, i))) continue;
      }
      const std::string_view term = body.substr(start, i - start);
      const std::size_t star = term.find('*');
      if (star == std::string_view::npos)
        throw std::invalid_argument("sum term '" + std::string(term) +
                                    "' is not of the form <weight>*<spec>");
      terms.emplace_back(parse_double(term.substr(0, star), "weight"),
                         parse_spec(term.substr(star + 1)));
      start = i + 1;
    }
    return Regularizer::weighted_sum(std::move(terms));
  }
  if (s.starts_with("min(") && s.ends_with(")")) {
    const std::string_view body = s.substr(4, s.size() - 5);
    int depth = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '(') ++depth;
      if (body[i] == ')') --depth;
      if (body[i] == ',' && depth == 0)
        return Regularizer::min_of(parse_spec(body.substr(0, i)), parse_spec(body.substr(i + 1)));
    }
    throw std::invalid_argument("min(...) needs two comma-separated specs");
  }
  throw std::invalid_argument("unrecognized regularizer spec: '" + std::string(s) + "'");
}

void require_domain(double x, double hi, const char* op) {
  if (!(x > 0.0) || !(x <= hi))
    throw std::domain_error(std::string(op) + ": x=" + fmt_double(x) + " outside (0, " +
                            (hi == 1.0 ? "1]" : "1)"));
}

}  // namespace
}  // namespace detail

using detail::Kind;
using detail::NodePtr;
using detail::RegNode;

Regularizer::Regularizer(NodePtr node) : node_(std::move(node)) {}

Regularizer Regularizer::shannon() {
  auto n = std::make_shared<RegNode>();
  n->kind = Kind::shannon;
  return Regularizer(detail::checked(std::move(n)));
}

Regularizer Regularizer::tsallis(double k, double q) {
  if (!(k > 0.0)) throw std::invalid_argument("tsallis: k must be > 0");
  if (!(q > 0.0) || q == 1.0) throw std::invalid_argument("tsallis: q must be > 0 and != 1");
  auto n = std::make_shared<RegNode>();
  n->kind = Kind::tsallis;
  n->a = k;
  n->b = q;
  return Regularizer(detail::checked(std::move(n)));
}

Regularizer Regularizer::cosine(double theta) {
  if (!(theta > 0.0) || !(theta <= std::acos(-1.0) / 2.0))
    throw std::invalid_argument("cos: theta must be in (0, pi/2]");
  auto n = std::make_shared<RegNode>();
  n->kind = Kind::cosine;
  n->a = theta;
  return Regularizer(detail::checked(std::move(n)));
}

Regularizer Regularizer::sine(double theta) {
  if (!(theta > 0.0) || !(theta <= std::acos(-1.0) / 2.0))
    throw std::invalid_argument("sin: theta must be in (0, pi/2]");
  auto n = std::make_shared<RegNode>();
  n->kind = Kind::sine;
  n->a = theta;
  return Regularizer(detail::checked(std::move(n)));
}

Regularizer Regularizer::exponential(double k, double q) {
  if (!(k >= 0.0)) throw std::invalid_argument("exp: k must be >= 0");
  if (!(q >= 1.0)) throw std::invalid_argument("exp: q must be >= 1");
  auto n = std::make_shared<RegNode>();
  n->kind = Kind::exponential;
  n->a = k;
  n->b = q;
  return Regularizer(detail::checked(std::move(n)));
}

Regularizer Regularizer::weighted_sum(std::vector<std::pair<double, Regularizer>> terms) {
  auto n = std::make_shared<RegNode>();
  n->kind = Kind::sum;
  bool any_positive = false;
  for (auto& [w, r] : terms) {
    if (!(w >= 0.0)) throw std::invalid_argument("sum: weights must be >= 0");
    if (w == 0.0) continue;  // zero-weight terms contribute nothing, drop them
    any_positive = true;
    n->terms.emplace_back(w, r.node_);
  }
  if (!any_positive)
    throw std::invalid_argument("sum: at least one weight must be strictly positive");
  return Regularizer(detail::checked(std::move(n)));
}

Regularizer Regularizer::min_of(const Regularizer& a, const Regularizer& b) {
  auto n = std::make_shared<RegNode>();
  n->kind = Kind::min;
  n->left = a.node_;
  n->right = b.node_;
  n->kinks = detail::find_kinks(*a.node_, *b.node_);
  return Regularizer(detail::checked(std::move(n)));
}

Regularizer Regularizer::parse(std::string_view text) {
  std::string stripped;
  stripped.reserve(text.size());
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) stripped.push_back(c);
  if (stripped.empty()) throw std::invalid_argument("empty regularizer spec");
  return detail::parse_spec(stripped);
}

std::string Regularizer::to_string() const { return detail::describe(*node_); }

double Regularizer::phi(double x) const {
  detail::require_domain(x, 1.0, "phi");
  return detail::node_phi(*node_, x);
}

double Regularizer::phi_prime(double x) const {
  if (!(x > 0.0) || !(x < 1.0))
    throw std::domain_error("phi_prime: x outside (0, 1)");
  return detail::node_phi_prime_checked(*node_, x);
}

double Regularizer::f_prime(double x) const {
  if (!(x > 0.0) || !(x < 1.0))
    throw std::domain_error("f_prime: x outside (0, 1)");
  return detail::node_phi(*node_, x) + x * detail::node_phi_prime_checked(*node_, x);
}

FPrimeBoundary Regularizer::f_prime_boundary() const { return detail::node_boundary(*node_); }

double Regularizer::phi_prime_unchecked(double x) const {
  return detail::node_phi_prime(*node_, x);
}

double Regularizer::f_prime_unchecked(double x) const { return detail::node_f_prime(*node_, x); }

double Regularizer::f_double_prime_unchecked(double x) const {
  return detail::node_f_second(*node_, x);
}

namespace {

// When f' diverges at 0 (any sum containing shannon) the root can lie far
// below the bisection margin; pin it in log space to relative precision.
// f'(e^t) is close to affine in t on the divergent branch, so safeguarded
// Newton from the upper end lands in a few steps; every iterate also
// tightens the bisection bracket that backs it up.
double invert_f_prime_tiny(const Regularizer& r, double y) {
  double tlo = std::log(1e-300), thi = std::log(detail::kInversionEps);
  if (r.f_prime_unchecked(std::exp(tlo)) <= y) return std::exp(tlo);
  double t = thi;
  for (int it = 0; it < 200; ++it) {
    const double x = std::exp(t);
    const double ft = r.f_prime_unchecked(x);
    if (ft > y)
      tlo = t;
    else
      thi = t;
    if (thi - tlo <= 1e-9) break;
    const double slope = r.f_double_prime_unchecked(x) * x;
    double tn = std::numeric_limits<double>::quiet_NaN();
    if (it % 4 != 3 && std::isfinite(slope) && slope < 0.0) tn = t - (ft - y) / slope;
    if (!(tn > tlo && tn < thi)) tn = 0.5 * (tlo + thi);
    const bool done = std::abs(tn - t) <= 1e-12 * (1.0 + std::abs(t));
    t = tn;
    if (done) break;
  }
  return std::exp(std::clamp(t, tlo, thi));
}

// Safeguarded inversion of the strictly decreasing f' on (eps, 1-eps):
// bisection brackets guarantee progress, Newton steps from f'' accelerate.
double invert_f_prime(const Regularizer& r, double y) {
  double lo = detail::kInversionEps, hi = 1.0 - detail::kInversionEps;
  if (y >= r.f_prime_unchecked(lo)) return invert_f_prime_tiny(r, y);
  if (y <= r.f_prime_unchecked(hi)) return hi;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double fx = r.f_prime_unchecked(x);
    if (fx == y) return x;
    if (fx > y)
      lo = x;
    else
      hi = x;
    const double d = r.f_double_prime_unchecked(x);
    if (std::isfinite(d) && d < 0.0) {
      const double xn = x + (y - fx) / d;
      if (xn > lo && xn < hi) {
        // Newton approaches one-sidedly, so the bracket rarely collapses;
        // a stalled step is the converged exit.
        if (std::abs(xn - x) <= 1e-15 + 1e-13 * x) return xn;
        x = xn;
        continue;
      }
    }
    x = 0.5 * (lo + hi);
  }
  return hi - lo <= 1e-12 ? 0.5 * (lo + hi) : x;
}

}  // namespace

double Regularizer::g(double y) const {
  const FPrimeBoundary bd = f_prime_boundary();
  if (y >= bd.at_zero) return 0.0;
  if (y <= bd.at_one) return 1.0;
  const RegNode& n = *node_;
  if (n.kind == Kind::shannon) return std::exp(-(1.0 + y));
  if (n.kind == Kind::tsallis && n.b == 2.0) return 0.5 - y / (2.0 * n.a);
  return invert_f_prime(*this, y);
}

double Regularizer::g_numeric(double y) const {
  const FPrimeBoundary bd = f_prime_boundary();
  if (y >= bd.at_zero) return 0.0;
  if (y <= bd.at_one) return 1.0;
  return invert_f_prime(*this, y);
}

bool Regularizer::induces_sparsity() const {
  return std::isfinite(f_prime_boundary().at_zero);
}

double Regularizer::entropy_like(std::span<const double> p) const {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || v > 1.0 + 1e-12)
      throw std::domain_error("entropy_like: entries must lie in [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::domain_error("entropy_like: probabilities sum to " + detail::fmt_double(sum));
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h += v * detail::node_phi(*node_, std::min(v, 1.0));
  return h;
}

std::vector<double> Regularizer::crossings() const {
  std::vector<double> out;
  detail::collect_kinks(*node_, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace regmdp
