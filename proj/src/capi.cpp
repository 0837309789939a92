#include "regmdp/regmdp.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "regmdp/analysis.hpp"
#include "regmdp/audit.hpp"
#include "regmdp/errors.hpp"
#include "regmdp/io.hpp"
#include "regmdp/mdp.hpp"
#include "regmdp/regularizer.hpp"
#include "regmdp/solver.hpp"

struct regmdp_regularizer {
  regmdp::Regularizer reg;
  std::string text;
};

struct regmdp_mdp {
  regmdp::TabularMdp mdp;
};

struct regmdp_solution {
  regmdp::Solution sol;
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  regmdp::SolutionMeta meta;
};

struct regmdp_sweep {
  std::vector<regmdp::SweepRecord> rows;
  std::size_t n_actions = 0;
};

struct regmdp_audit {
  regmdp::AuditReport report;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& what) { g_last_error = what; }

/* Runs body, translating exceptions to status codes. invalid_argument maps
 * to on_invalid so parse entry points can report REGMDP_ERR_PARSE. */
template <typename F>
regmdp_status run(regmdp_status on_invalid, F&& body) {
  try {
    body();
    return REGMDP_OK;
  } catch (const regmdp::convergence_error& e) {
    set_error(e.what());
    return REGMDP_ERR_NO_CONVERGENCE;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return on_invalid;
  } catch (const std::logic_error& e) {
    set_error(e.what());
    return REGMDP_ERR_INTERNAL;
  } catch (const std::runtime_error& e) {
    set_error(e.what());
    return REGMDP_ERR_IO;
  } catch (const std::exception& e) {
    set_error(e.what());
    return REGMDP_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

regmdp_status require(bool ok, const char* what) {
  if (ok) return REGMDP_OK;
  set_error(what);
  return REGMDP_ERR_INVALID_ARGUMENT;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  return out + "\"";
}

}  // namespace

extern "C" {

const char* regmdp_version(void) { return "0.1.0"; }

const char* regmdp_last_error(void) { return g_last_error.c_str(); }

void regmdp_string_free(char* s) { std::free(s); }

/* --- regularizers ------------------------------------------------------- */

regmdp_status regmdp_regularizer_parse(const char* text, regmdp_regularizer** out) {
  if (regmdp_status st = require(text && out, "regularizer_parse: null argument")) return st;
  *out = nullptr;
  return run(REGMDP_ERR_PARSE, [&] {
    auto handle = std::make_unique<regmdp_regularizer>(
        regmdp_regularizer{regmdp::Regularizer::parse(text), ""});
    handle->text = handle->reg.to_string();
    *out = handle.release();
  });
}

regmdp_status regmdp_regularizer_canonical(const regmdp_regularizer* reg, char** out) {
  if (regmdp_status st = require(reg && out, "regularizer_canonical: null argument")) return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT, [&] { *out = copy_string(reg->text); });
}

int regmdp_regularizer_induces_sparsity(const regmdp_regularizer* reg) {
  return reg && reg->reg.induces_sparsity() ? 1 : 0;
}

void regmdp_regularizer_free(regmdp_regularizer* reg) { delete reg; }

/* --- MDPs --------------------------------------------------------------- */

regmdp_status regmdp_mdp_random(uint64_t n_states, uint64_t n_actions, double gamma,
                                double clip_prob, uint64_t seed, regmdp_mdp** out) {
  if (regmdp_status st = require(out != nullptr, "mdp_random: null output")) return st;
  *out = nullptr;
  return run(REGMDP_ERR_INVALID_ARGUMENT, [&] {
    *out = new regmdp_mdp{regmdp::random_mdp(n_states, n_actions, gamma, clip_prob, seed)};
  });
}

regmdp_status regmdp_mdp_gridworld(uint64_t n, double gamma, regmdp_mdp** out) {
  if (regmdp_status st = require(out != nullptr, "mdp_gridworld: null output")) return st;
  *out = nullptr;
  return run(REGMDP_ERR_INVALID_ARGUMENT,
             [&] { *out = new regmdp_mdp{regmdp::gridworld(n, gamma)}; });
}

regmdp_status regmdp_mdp_from_json(const char* text, regmdp_mdp** out) {
  if (regmdp_status st = require(text && out, "mdp_from_json: null argument")) return st;
  *out = nullptr;
  return run(REGMDP_ERR_PARSE,
             [&] { *out = new regmdp_mdp{regmdp::mdp_from_json(text)}; });
}

regmdp_status regmdp_mdp_to_json(const regmdp_mdp* mdp, char** out) {
  if (regmdp_status st = require(mdp && out, "mdp_to_json: null argument")) return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT,
             [&] { *out = copy_string(regmdp::mdp_to_json(mdp->mdp)); });
}

regmdp_status regmdp_mdp_perturb_gamma(const regmdp_mdp* mdp, double factor,
                                       regmdp_mdp** out) {
  if (regmdp_status st = require(mdp && out, "mdp_perturb_gamma: null argument")) return st;
  *out = nullptr;
  return run(REGMDP_ERR_INVALID_ARGUMENT, [&] {
    regmdp::TabularMdp copy = mdp->mdp;
    copy.gamma *= factor;
    const std::vector<std::string> problems = regmdp::validate(copy);
    if (!problems.empty())
      throw std::invalid_argument("mdp_perturb_gamma: " + problems.front());
    *out = new regmdp_mdp{std::move(copy)};
  });
}

uint64_t regmdp_mdp_n_states(const regmdp_mdp* mdp) { return mdp ? mdp->mdp.n_states : 0; }

uint64_t regmdp_mdp_n_actions(const regmdp_mdp* mdp) { return mdp ? mdp->mdp.n_actions : 0; }

double regmdp_mdp_gamma(const regmdp_mdp* mdp) {
  return mdp ? mdp->mdp.gamma : std::numeric_limits<double>::quiet_NaN();
}

uint64_t regmdp_mdp_default_probe(const regmdp_mdp* mdp) {
  if (!mdp) return 0;
  return regmdp::default_probe_states(mdp->mdp).front();
}

void regmdp_mdp_free(regmdp_mdp* mdp) { delete mdp; }

/* --- solving ------------------------------------------------------------ */

regmdp_status regmdp_solve(const regmdp_mdp* mdp, const regmdp_regularizer* reg,
                           double lambda, int method, double tol, uint64_t max_iter,
                           regmdp_solution** out) {
  if (regmdp_status st = require(mdp && reg && out, "solve: null argument")) return st;
  if (regmdp_status st =
          require(method == REGMDP_METHOD_VI || method == REGMDP_METHOD_RPI,
                  "solve: method must be REGMDP_METHOD_VI or REGMDP_METHOD_RPI"))
    return st;
  *out = nullptr;
  return run(REGMDP_ERR_INVALID_ARGUMENT, [&] {
    const double use_tol = tol > 0.0 ? tol : 1e-8;
    auto handle = std::make_unique<regmdp_solution>();
    if (method == REGMDP_METHOD_VI) {
      const std::size_t budget = max_iter ? max_iter : 100000;
      handle->sol = regmdp::value_iterate(mdp->mdp, reg->reg, lambda, use_tol, budget);
      handle->meta.method = "vi";
      handle->meta.max_iter = budget;
    } else {
      const std::size_t budget = max_iter ? max_iter : 500;
      handle->sol = regmdp::rpi(mdp->mdp, reg->reg, lambda, use_tol, budget);
      handle->meta.method = "rpi";
      handle->meta.max_iter = budget;
    }
    handle->n_states = mdp->mdp.n_states;
    handle->n_actions = mdp->mdp.n_actions;
    handle->meta.regularizer = reg->text;
    handle->meta.lambda = lambda;
    handle->meta.tol = use_tol;
    *out = handle.release();
  });
}

uint64_t regmdp_solution_iterations(const regmdp_solution* sol) {
  return sol ? sol->sol.iterations : 0;
}

double regmdp_solution_final_residual(const regmdp_solution* sol) {
  return sol ? sol->sol.final_residual : std::numeric_limits<double>::quiet_NaN();
}

const double* regmdp_solution_v_star(const regmdp_solution* sol, size_t* n_states) {
  if (!sol) return nullptr;
  if (n_states) *n_states = sol->n_states;
  return sol->sol.v_star.data();
}

const double* regmdp_solution_policy(const regmdp_solution* sol, size_t* n_states,
                                     size_t* n_actions) {
  if (!sol) return nullptr;
  if (n_states) *n_states = sol->n_states;
  if (n_actions) *n_actions = sol->n_actions;
  return sol->sol.policy.v.data();
}

regmdp_status regmdp_solution_delta(const regmdp_solution* sol, double epsilon, double* out) {
  if (regmdp_status st = require(sol && out, "solution_delta: null argument")) return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT,
             [&] { *out = regmdp::sparsity(sol->sol.policy, epsilon); });
}

regmdp_status regmdp_solution_to_json(const regmdp_solution* sol, const char* mdp_hash,
                                      char** out) {
  if (regmdp_status st = require(sol && mdp_hash && out, "solution_to_json: null argument"))
    return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT, [&] {
    regmdp::SolutionMeta meta = sol->meta;
    meta.mdp_hash = mdp_hash;
    *out = copy_string(
        regmdp::solution_to_json(sol->sol, sol->n_states, sol->n_actions, meta));
  });
}

void regmdp_solution_free(regmdp_solution* sol) { delete sol; }

/* --- lambda sweeps ------------------------------------------------------ */

regmdp_status regmdp_sweep_run(const regmdp_mdp* mdp, const regmdp_regularizer* reg,
                               const double* lambdas, size_t n_lambdas, int method,
                               double tol, int64_t probe_state, uint32_t n_threads,
                               regmdp_sweep** out) {
  if (regmdp_status st = require(mdp && reg && lambdas && out, "sweep_run: null argument"))
    return st;
  if (regmdp_status st =
          require(method == REGMDP_METHOD_VI || method == REGMDP_METHOD_RPI,
                  "sweep_run: method must be REGMDP_METHOD_VI or REGMDP_METHOD_RPI"))
    return st;
  if (regmdp_status st = require(probe_state >= -1, "sweep_run: probe_state must be >= -1"))
    return st;
  *out = nullptr;
  return run(REGMDP_ERR_INVALID_ARGUMENT, [&] {
    const std::vector<double> grid(lambdas, lambdas + n_lambdas);
    const std::size_t probe = probe_state >= 0
                                  ? static_cast<std::size_t>(probe_state)
                                  : regmdp::default_probe_states(mdp->mdp).front();
    const auto choice = method == REGMDP_METHOD_VI ? regmdp::SolverChoice::vi
                                                   : regmdp::SolverChoice::rpi;
    const double use_tol = tol > 0.0 ? tol : 1e-8;
    auto rows = regmdp::lambda_sweep(mdp->mdp, reg->reg, grid, choice, use_tol, probe,
                                     n_threads);
    *out = new regmdp_sweep{std::move(rows), mdp->mdp.n_actions};
  });
}

size_t regmdp_sweep_rows(const regmdp_sweep* sweep) { return sweep ? sweep->rows.size() : 0; }

int regmdp_sweep_row_ok(const regmdp_sweep* sweep, size_t row) {
  return sweep && row < sweep->rows.size() && sweep->rows[row].ok ? 1 : 0;
}

regmdp_status regmdp_sweep_to_csv(const regmdp_sweep* sweep, char** out) {
  if (regmdp_status st = require(sweep && out, "sweep_to_csv: null argument")) return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT, [&] {
    std::string csv =
        "lambda,delta,uniformity_gap,err_thm5,bound_thm5,policy_subopt,iterations";
    for (std::size_t a = 0; a < sweep->n_actions; ++a) csv += ",p" + std::to_string(a);
    csv += ",status\n";
    for (const regmdp::SweepRecord& rec : sweep->rows) {
      csv += fmt17(rec.lambda);
      csv += "," + fmt17(rec.delta);
      csv += "," + fmt17(rec.uniformity_gap);
      csv += "," + fmt17(rec.err_thm5);
      csv += "," + fmt17(rec.bound_thm5);
      csv += "," + fmt17(rec.policy_subopt);
      csv += "," + std::to_string(rec.iterations);
      for (std::size_t a = 0; a < sweep->n_actions; ++a)
        csv += "," + (a < rec.probe_pi.size() ? fmt17(rec.probe_pi[a]) : std::string("nan"));
      csv += "," + csv_field(rec.status) + "\n";
    }
    *out = copy_string(csv);
  });
}

void regmdp_sweep_free(regmdp_sweep* sweep) { delete sweep; }

/* --- audits ------------------------------------------------------------- */

regmdp_status regmdp_audit_run(const regmdp_mdp* mdp, const char* const* reg_texts,
                               size_t n_regs, const double* lambdas, size_t n_lambdas,
                               uint64_t trials, uint64_t seed, double gamma_claim,
                               regmdp_audit** out) {
  if (regmdp_status st = require(mdp && reg_texts && lambdas && out, "audit_run: null argument"))
    return st;
  *out = nullptr;
  regmdp_status parse_status = REGMDP_OK;
  const regmdp_status st = run(REGMDP_ERR_INVALID_ARGUMENT, [&] {
    std::vector<regmdp::Regularizer> regs;
    regs.reserve(n_regs);
    for (size_t i = 0; i < n_regs; ++i) {
      if (!reg_texts[i]) throw std::invalid_argument("audit_run: null regularizer text");
      try {
        regs.push_back(regmdp::Regularizer::parse(reg_texts[i]));
      } catch (const std::invalid_argument&) {
        parse_status = REGMDP_ERR_PARSE;
        throw;
      }
    }
    const std::vector<double> grid(lambdas, lambdas + n_lambdas);
    *out = new regmdp_audit{
        regmdp::run_audit(mdp->mdp, regs, grid, trials, seed, gamma_claim)};
  });
  return st != REGMDP_OK && parse_status != REGMDP_OK ? parse_status : st;
}

int regmdp_audit_pass(const regmdp_audit* audit) {
  return audit && audit->report.pass ? 1 : 0;
}

regmdp_status regmdp_audit_report(const regmdp_audit* audit, char** out) {
  if (regmdp_status st = require(audit && out, "audit_report: null argument")) return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT,
             [&] { *out = copy_string(audit->report.render()); });
}

void regmdp_audit_free(regmdp_audit* audit) { delete audit; }

/* --- files -------------------------------------------------------------- */

regmdp_status regmdp_read_file(const char* path, char** out) {
  if (regmdp_status st = require(path && out, "read_file: null argument")) return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT,
             [&] { *out = copy_string(regmdp::read_file(path)); });
}

regmdp_status regmdp_write_file_atomic(const char* path, const char* content) {
  if (regmdp_status st = require(path && content, "write_file_atomic: null argument"))
    return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT,
             [&] { regmdp::write_file_atomic(path, content); });
}

regmdp_status regmdp_content_hash(const char* bytes, char** out) {
  if (regmdp_status st = require(bytes && out, "content_hash: null argument")) return st;
  return run(REGMDP_ERR_INVALID_ARGUMENT,
             [&] { *out = copy_string(regmdp::content_hash(bytes)); });
}

}  // extern "C"
