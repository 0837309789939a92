// Experiment front end. Talks to the library through the C interface only;
// all numerics live behind it.
#include "regmdp/regmdp.h"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

struct Str {
  char* s = nullptr;
  ~Str() { regmdp_string_free(s); }
  const char* c_str() const { return s ? s : ""; }
  std::string str() const { return s ? s : ""; }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() {
    if (p) Free(p);
  }
  operator T*() const { return p; }
  T** out() { return &p; }
};

using RegHandle = Handle<regmdp_regularizer, regmdp_regularizer_free>;
using MdpHandle = Handle<regmdp_mdp, regmdp_mdp_free>;
using SolutionHandle = Handle<regmdp_solution, regmdp_solution_free>;
using SweepHandle = Handle<regmdp_sweep, regmdp_sweep_free>;
using AuditHandle = Handle<regmdp_audit, regmdp_audit_free>;

int fail(regmdp_status st) {
  std::fprintf(stderr, "error: %s\n", regmdp_last_error());
  return static_cast<int>(st);
}

// Grid spec: logspace(lo,hi,n) or a comma list. Ordering and positivity are
// enforced by the library where they matter.
std::vector<double> parse_lambda_spec(const std::string& spec) {
  std::vector<double> grid;
  if (spec.rfind("logspace(", 0) == 0 && !spec.empty() && spec.back() == ')') {
    const std::string inner = spec.substr(9, spec.size() - 10);
    double lo = 0.0, hi = 0.0;
    long n = 0;
    char trailing = 0;
    if (std::sscanf(inner.c_str(), "%lf ,%lf ,%ld %c", &lo, &hi, &n, &trailing) != 3 ||
        !(lo > 0.0) || !(hi >= lo) || n < 1)
      throw std::invalid_argument("bad grid spec: " + spec);
    if (n == 1) return {lo};
    const double step = (std::log10(hi) - std::log10(lo)) / static_cast<double>(n - 1);
    for (long i = 0; i < n; ++i)
      grid.push_back(std::pow(10.0, std::log10(lo) + static_cast<double>(i) * step));
    grid.front() = lo;  // pin endpoints against log/pow round-off
    grid.back() = hi;
    return grid;
  }
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string tok = spec.substr(pos, comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != tok.size()) throw std::invalid_argument("bad lambda value: '" + tok + "'");
    grid.push_back(v);
    pos = comma + 1;
  }
  return grid;
}

uint32_t threads_from_env() {
  const char* e = std::getenv("REGMDP_THREADS");
  if (!e || !*e) return 0;  // auto
  char* end = nullptr;
  const unsigned long v = std::strtoul(e, &end, 10);
  if (end == e || *end != '\0') {
    std::fprintf(stderr, "warning: ignoring REGMDP_THREADS='%s'\n", e);
    return 0;
  }
  return static_cast<uint32_t>(v);
}

struct LoadedMdp {
  MdpHandle mdp;
  std::string hash;
};

int load_mdp(const std::string& path, LoadedMdp* out) {
  Str bytes;
  regmdp_status st;
  if ((st = regmdp_read_file(path.c_str(), &bytes.s))) return fail(st);
  Str hash;
  if ((st = regmdp_content_hash(bytes.c_str(), &hash.s))) return fail(st);
  if ((st = regmdp_mdp_from_json(bytes.c_str(), out->mdp.out()))) return fail(st);
  out->hash = hash.str();
  return 0;
}

struct GenArgs {
  std::string kind;
  uint64_t states = 0;
  uint64_t actions = 0;
  uint64_t n = 0;
  uint64_t seed = 0;
  double gamma = 0.0;
  double clip = 0.0;
  std::string out;
};

int cmd_gen_mdp(const GenArgs& a) {
  MdpHandle mdp;
  regmdp_status st;
  if (a.kind == "random") {
    if (a.states == 0 || a.actions == 0) {
      std::fprintf(stderr, "error: --kind random needs --states and --actions\n");
      return REGMDP_ERR_INVALID_ARGUMENT;
    }
    st = regmdp_mdp_random(a.states, a.actions, a.gamma, a.clip, a.seed, mdp.out());
  } else {
    if (a.n == 0) {
      std::fprintf(stderr, "error: --kind gridworld needs --n\n");
      return REGMDP_ERR_INVALID_ARGUMENT;
    }
    st = regmdp_mdp_gridworld(a.n, a.gamma, mdp.out());
  }
  if (st) return fail(st);
  Str text;
  if ((st = regmdp_mdp_to_json(mdp, &text.s))) return fail(st);
  if ((st = regmdp_write_file_atomic(a.out.c_str(), text.c_str()))) return fail(st);
  Str hash;
  if ((st = regmdp_content_hash(text.c_str(), &hash.s))) return fail(st);
  std::printf("wrote %s (%" PRIu64 " states, %" PRIu64 " actions)\n", a.out.c_str(),
              regmdp_mdp_n_states(mdp), regmdp_mdp_n_actions(mdp));
  std::printf("hash %s\n", hash.c_str());
  return 0;
}

struct SolveArgs {
  std::string mdp_path;
  std::string reg = "shannon";
  double lambda = 0.0;
  std::string method = "vi";
  double tol = 0.0;  // 0 = library default
  uint64_t max_iter = 0;
  std::string out = "solution.json";
};

int cmd_solve(const SolveArgs& a) {
  LoadedMdp in;
  if (int rc = load_mdp(a.mdp_path, &in)) return rc;
  RegHandle reg;
  regmdp_status st;
  if ((st = regmdp_regularizer_parse(a.reg.c_str(), reg.out()))) return fail(st);
  const int method = a.method == "rpi" ? REGMDP_METHOD_RPI : REGMDP_METHOD_VI;
  SolutionHandle sol;
  if ((st = regmdp_solve(in.mdp, reg, a.lambda, method, a.tol, a.max_iter, sol.out())))
    return fail(st);
  double delta = 0.0;
  if ((st = regmdp_solution_delta(sol, 1e-9, &delta))) return fail(st);
  Str canonical;
  if ((st = regmdp_regularizer_canonical(reg, &canonical.s))) return fail(st);
  std::printf("regularizer %s  lambda %g  method %s\n", canonical.c_str(), a.lambda,
              a.method.c_str());
  std::printf("delta %.6g\n", delta);
  std::printf("iterations %" PRIu64 "\n", regmdp_solution_iterations(sol));
  std::printf("final_residual %.6e\n", regmdp_solution_final_residual(sol));
  Str text;
  if ((st = regmdp_solution_to_json(sol, in.hash.c_str(), &text.s))) return fail(st);
  if ((st = regmdp_write_file_atomic(a.out.c_str(), text.c_str()))) return fail(st);
  std::printf("wrote %s\n", a.out.c_str());
  return 0;
}

struct SweepArgs {
  std::string mdp_path;
  std::string reg;
  std::string lambdas = "logspace(1e-3,1e3,61)";
  std::string method = "vi";
  double tol = 0.0;
  int64_t probe = -1;
  std::string out;
};

int cmd_sweep(const SweepArgs& a) {
  LoadedMdp in;
  if (int rc = load_mdp(a.mdp_path, &in)) return rc;
  RegHandle reg;
  regmdp_status st;
  if ((st = regmdp_regularizer_parse(a.reg.c_str(), reg.out()))) return fail(st);
  std::vector<double> grid;
  try {
    grid = parse_lambda_spec(a.lambdas);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return REGMDP_ERR_INVALID_ARGUMENT;
  }
  const int method = a.method == "rpi" ? REGMDP_METHOD_RPI : REGMDP_METHOD_VI;
  const int64_t probe =
      a.probe >= 0 ? a.probe : static_cast<int64_t>(regmdp_mdp_default_probe(in.mdp));
  const uint32_t threads = threads_from_env();
  SweepHandle sweep;
  if ((st = regmdp_sweep_run(in.mdp, reg, grid.data(), grid.size(), method, a.tol, probe,
                             threads, sweep.out())))
    return fail(st);
  Str csv;
  if ((st = regmdp_sweep_to_csv(sweep, &csv.s))) return fail(st);
  Str canonical;
  if ((st = regmdp_regularizer_canonical(reg, &canonical.s))) return fail(st);

  std::string text;
  text += "# regmdp sweep " + std::string(regmdp_version()) + "\n";
  text += "# mdp: " + a.mdp_path + " " + in.hash + "\n";
  text += "# regularizer: " + canonical.str() + "\n";
  text += "# lambdas: " + a.lambdas + "\n";
  char line[160];
  std::snprintf(line, sizeof line, "# method: %s  tol: %g  probe: %" PRId64 "  threads: %u\n",
                a.method.c_str(), a.tol > 0.0 ? a.tol : 1e-8, probe, threads);
  text += line;
  text += csv.str();
  if ((st = regmdp_write_file_atomic(a.out.c_str(), text.c_str()))) return fail(st);

  const std::size_t rows = regmdp_sweep_rows(sweep);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < rows; ++i) bad += regmdp_sweep_row_ok(sweep, i) ? 0 : 1;
  if (bad)
    std::fprintf(stderr, "warning: %zu of %zu lambda points failed; see status column\n", bad,
                 rows);
  std::printf("wrote %s (%zu rows)\n", a.out.c_str(), rows);
  return 0;
}

struct AuditArgs {
  std::string mdp_path;
  std::vector<std::string> regs;
  std::string lambdas = "0.1,1";
  uint64_t trials = 100;
  uint64_t seed = 42;
  double perturb_gamma = 1.0;
  std::string out;
};

const std::vector<std::string>& default_audit_regs() {
  static const std::vector<std::string> regs = {
      "shannon",
      "tsallis:k=0.5,q=2",
      "cos:theta=1.5707963267948966",
      "exp:k=0,q=2.718281828459045",
      "min(shannon,tsallis:k=2,q=2)",
      "sum(1*tsallis:k=0.5,q=2+1*tsallis:k=2,q=3)",
      "sum(1*shannon+1*tsallis:k=0.5,q=2)",
  };
  return regs;
}

int cmd_audit(const AuditArgs& a) {
  LoadedMdp in;
  if (int rc = load_mdp(a.mdp_path, &in)) return rc;
  const double gamma_claim = regmdp_mdp_gamma(in.mdp);

  // The perturbed copy is the operand; the claim stays at the file's
  // discount, so an inflated operator modulus is caught, not re-asserted.
  MdpHandle nudged;
  const regmdp_mdp* operand = in.mdp.p;
  regmdp_status st;
  if (a.perturb_gamma != 1.0) {
    if ((st = regmdp_mdp_perturb_gamma(in.mdp, a.perturb_gamma, nudged.out())))
      return fail(st);
    operand = nudged.p;
  }

  std::vector<double> lambdas;
  try {
    lambdas = parse_lambda_spec(a.lambdas);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return REGMDP_ERR_INVALID_ARGUMENT;
  }
  const std::vector<std::string>& regs = a.regs.empty() ? default_audit_regs() : a.regs;
  std::vector<const char*> reg_ptrs;
  reg_ptrs.reserve(regs.size());
  for (const std::string& r : regs) reg_ptrs.push_back(r.c_str());

  AuditHandle audit;
  if ((st = regmdp_audit_run(operand, reg_ptrs.data(), reg_ptrs.size(), lambdas.data(),
                             lambdas.size(), a.trials, a.seed, gamma_claim, audit.out())))
    return fail(st);
  Str report;
  if ((st = regmdp_audit_report(audit, &report.s))) return fail(st);

  std::string text;
  text += "# regmdp audit " + std::string(regmdp_version()) + "\n";
  text += "# mdp: " + a.mdp_path + " " + in.hash + "\n";
  char line[256];
  std::snprintf(line, sizeof line,
                "# gamma: operand %.17g  claimed %.17g  perturb %g\n",
                regmdp_mdp_gamma(operand), gamma_claim, a.perturb_gamma);
  text += line;
  std::snprintf(line, sizeof line, "# trials %" PRIu64 "  seed %" PRIu64 "  lambdas %s\n",
                a.trials, a.seed, a.lambdas.c_str());
  text += line;
  text += "# regularizers:";
  for (const std::string& r : regs) text += " [" + r + "]";
  text += "\n";
  text += report.str();

  std::fputs(text.c_str(), stdout);
  if (!a.out.empty()) {
    if ((st = regmdp_write_file_atomic(a.out.c_str(), text.c_str()))) return fail(st);
    std::printf("wrote %s\n", a.out.c_str());
  }
  return regmdp_audit_pass(audit) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabular regularized-MDP experiments"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen-mdp", "generate an MDP file");
  g->add_option("--kind", gen.kind, "random | gridworld")
      ->required()
      ->check(CLI::IsMember({"random", "gridworld"}));
  g->add_option("--states", gen.states, "state count (random)");
  g->add_option("--actions", gen.actions, "action count (random)");
  g->add_option("--n", gen.n, "side length (gridworld)");
  g->add_option("--gamma", gen.gamma, "discount in (0,1)")->required();
  g->add_option("--clip", gen.clip, "transition clip probability")->capture_default_str();
  g->add_option("--seed", gen.seed, "rng seed")->capture_default_str();
  g->add_option("--out", gen.out, "output path")->required();

  SolveArgs solve;
  CLI::App* s = app.add_subcommand("solve", "solve one regularized problem");
  s->add_option("--mdp", solve.mdp_path, "MDP file")->required();
  s->add_option("--reg", solve.reg, "regularizer text")->capture_default_str();
  s->add_option("--lambda", solve.lambda, "regularization weight (0 = plain greedy)")
      ->required();
  s->add_option("--method", solve.method, "vi | rpi")
      ->capture_default_str()
      ->check(CLI::IsMember({"vi", "rpi"}));
  s->add_option("--tol", solve.tol, "residual tolerance (0 = default 1e-8)");
  s->add_option("--max-iter", solve.max_iter, "iteration cap (0 = default)");
  s->add_option("--out", solve.out, "solution path")->capture_default_str();

  SweepArgs sweep;
  CLI::App* w = app.add_subcommand("sweep", "solve across a lambda grid, write CSV");
  w->add_option("--mdp", sweep.mdp_path, "MDP file")->required();
  w->add_option("--reg", sweep.reg, "regularizer text")->required();
  w->add_option("--lambdas", sweep.lambdas, "logspace(lo,hi,n) or comma list")
      ->capture_default_str();
  w->add_option("--method", sweep.method, "vi | rpi")
      ->capture_default_str()
      ->check(CLI::IsMember({"vi", "rpi"}));
  w->add_option("--tol", sweep.tol, "residual tolerance (0 = default 1e-8)");
  w->add_option("--probe", sweep.probe, "probe state (-1 = environment default)")
      ->capture_default_str();
  w->add_option("--out", sweep.out, "CSV path")->required();

  AuditArgs audit;
  CLI::App* d = app.add_subcommand("audit", "check operator and bound properties");
  d->add_option("--mdp", audit.mdp_path, "MDP file")->required();
  d->add_option("--reg", audit.regs, "regularizer text (repeatable; default: all seven)");
  d->add_option("--lambdas", audit.lambdas, "comma list, 0 allowed")->capture_default_str();
  d->add_option("--trials", audit.trials, "random value functions per battery")
      ->capture_default_str();
  d->add_option("--seed", audit.seed, "rng seed")->capture_default_str();
  d->add_option("--perturb-gamma", audit.perturb_gamma,
                "fault injection: scale the operand discount, keep the claim")
      ->capture_default_str();
  d->add_option("--out", audit.out, "also write the report here");

  CLI11_PARSE(app, argc, argv);

  if (g->parsed()) return cmd_gen_mdp(gen);
  if (s->parsed()) return cmd_solve(solve);
  if (w->parsed()) return cmd_sweep(sweep);
  return cmd_audit(audit);
}
