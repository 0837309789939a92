/* C interface to the regularized-MDP library. Every object is an opaque
 * handle owned by the caller and released with the matching _free; every
 * fallible call returns a status code and leaves a message readable via
 * regmdp_last_error() on the calling thread. Strings returned through char**
 * outputs are heap copies released with regmdp_string_free. */
#ifndef REGMDP_H
#define REGMDP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum regmdp_status {
  REGMDP_OK = 0,
  REGMDP_ERR_INVALID_ARGUMENT = 1,
  REGMDP_ERR_PARSE = 2,
  REGMDP_ERR_NO_CONVERGENCE = 3,
  REGMDP_ERR_IO = 4,
  REGMDP_ERR_INTERNAL = 5
} regmdp_status;

typedef struct regmdp_regularizer regmdp_regularizer;
typedef struct regmdp_mdp regmdp_mdp;
typedef struct regmdp_solution regmdp_solution;
typedef struct regmdp_sweep regmdp_sweep;
typedef struct regmdp_audit regmdp_audit;

const char* regmdp_version(void);

/* Message for the most recent failing call on this thread; never NULL. */
const char* regmdp_last_error(void);

void regmdp_string_free(char* s);

/* --- regularizers ------------------------------------------------------- */

/* Grammar: shannon | tsallis:k=..,q=.. | cos:theta=.. | sin:theta=.. |
 * exp:k=..,q=.. | sum(w1*R1+w2*R2+...) | min(R1,R2). */
regmdp_status regmdp_regularizer_parse(const char* text, regmdp_regularizer** out);
regmdp_status regmdp_regularizer_canonical(const regmdp_regularizer* reg, char** out);
int regmdp_regularizer_induces_sparsity(const regmdp_regularizer* reg);
void regmdp_regularizer_free(regmdp_regularizer* reg);

/* --- MDPs --------------------------------------------------------------- */

regmdp_status regmdp_mdp_random(uint64_t n_states, uint64_t n_actions, double gamma,
                                double clip_prob, uint64_t seed, regmdp_mdp** out);
regmdp_status regmdp_mdp_gridworld(uint64_t n, double gamma, regmdp_mdp** out);
regmdp_status regmdp_mdp_from_json(const char* text, regmdp_mdp** out);
regmdp_status regmdp_mdp_to_json(const regmdp_mdp* mdp, char** out);

/* Copy with the discount multiplied by factor; the copy must still be a
 * valid MDP (discount in (0,1)). For fault-injection in audits. */
regmdp_status regmdp_mdp_perturb_gamma(const regmdp_mdp* mdp, double factor,
                                       regmdp_mdp** out);

uint64_t regmdp_mdp_n_states(const regmdp_mdp* mdp);
uint64_t regmdp_mdp_n_actions(const regmdp_mdp* mdp);
double regmdp_mdp_gamma(const regmdp_mdp* mdp);

/* First default probe state for sweeps (grid center for gridworlds). */
uint64_t regmdp_mdp_default_probe(const regmdp_mdp* mdp);

void regmdp_mdp_free(regmdp_mdp* mdp);

/* --- solving ------------------------------------------------------------ */

#define REGMDP_METHOD_VI 0
#define REGMDP_METHOD_RPI 1

/* lambda = 0 solves the unregularized problem (greedy, lowest-index ties).
 * Pass tol <= 0 or max_iter = 0 for the defaults (1e-8; 100000 for value
 * iteration, 500 for policy iteration). Non-convergence within the budget
 * reports REGMDP_ERR_NO_CONVERGENCE. */
regmdp_status regmdp_solve(const regmdp_mdp* mdp, const regmdp_regularizer* reg,
                           double lambda, int method, double tol, uint64_t max_iter,
                           regmdp_solution** out);

uint64_t regmdp_solution_iterations(const regmdp_solution* sol);
double regmdp_solution_final_residual(const regmdp_solution* sol);

/* Borrowed views; valid until the solution handle is freed. */
const double* regmdp_solution_v_star(const regmdp_solution* sol, size_t* n_states);
const double* regmdp_solution_policy(const regmdp_solution* sol, size_t* n_states,
                                     size_t* n_actions);

/* Fraction of (state, action) pairs with probability above epsilon. */
regmdp_status regmdp_solution_delta(const regmdp_solution* sol, double epsilon, double* out);

/* Serialize with solve provenance; mdp_hash is the content hash of the MDP
 * file that was solved (pass "" when the MDP never touched a file). */
regmdp_status regmdp_solution_to_json(const regmdp_solution* sol, const char* mdp_hash,
                                      char** out);

void regmdp_solution_free(regmdp_solution* sol);

/* --- lambda sweeps ------------------------------------------------------ */

/* lambdas must be finite, > 0, sorted ascending. probe_state -1 picks the
 * library default for the MDP kind. n_threads 0 means one worker per
 * hardware thread; failures at individual lambdas are recorded in their
 * rows, not reported as an error. */
regmdp_status regmdp_sweep_run(const regmdp_mdp* mdp, const regmdp_regularizer* reg,
                               const double* lambdas, size_t n_lambdas, int method,
                               double tol, int64_t probe_state, uint32_t n_threads,
                               regmdp_sweep** out);

size_t regmdp_sweep_rows(const regmdp_sweep* sweep);
int regmdp_sweep_row_ok(const regmdp_sweep* sweep, size_t row);

/* Header: lambda,delta,uniformity_gap,err_thm5,bound_thm5,policy_subopt,
 * iterations,p0..p{A-1},status. Full double precision. */
regmdp_status regmdp_sweep_to_csv(const regmdp_sweep* sweep, char** out);

void regmdp_sweep_free(regmdp_sweep* sweep);

/* --- audits ------------------------------------------------------------- */

/* Runs the contraction / monotonicity / translation / sandwich batteries
 * (trials random value functions per regularizer and lambda, seeded) plus
 * the performance-error bound. gamma_claim is the contraction modulus the
 * audit asserts; pass the original discount when auditing a perturbed copy.
 * Lambdas may include 0. */
regmdp_status regmdp_audit_run(const regmdp_mdp* mdp, const char* const* reg_texts,
                               size_t n_regs, const double* lambdas, size_t n_lambdas,
                               uint64_t trials, uint64_t seed, double gamma_claim,
                               regmdp_audit** out);

int regmdp_audit_pass(const regmdp_audit* audit);
regmdp_status regmdp_audit_report(const regmdp_audit* audit, char** out);
void regmdp_audit_free(regmdp_audit* audit);

/* --- files -------------------------------------------------------------- */

regmdp_status regmdp_read_file(const char* path, char** out);

/* Temp file in the target directory plus rename; readers never observe a
 * partial file. */
regmdp_status regmdp_write_file_atomic(const char* path, const char* content);

/* "fnv1a64:" + 16 hex digits over the bytes of a NUL-terminated string. */
regmdp_status regmdp_content_hash(const char* bytes, char** out);

#ifdef __cplusplus
}
#endif

#endif /* REGMDP_H */
