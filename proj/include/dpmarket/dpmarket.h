/*
 * dpmarket — differentially-private data market equilibria.
 *
 * C interface to the pricing, equilibrium and verification engine. All
 * functions return a dpm_status; on failure dpm_error_message() describes
 * what went wrong (thread-local, valid until the next failing call on the
 * same thread). Objects returned through out-parameters are owned by the
 * caller and released with the matching *_free function.
 */
#ifndef DPMARKET_DPMARKET_H
#define DPMARKET_DPMARKET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DPM_BUILDING_SHARED)
#define DPM_API __declspec(dllexport)
#else
#define DPM_API __declspec(dllimport)
#endif
#else
#define DPM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dpm_status {
  DPM_OK = 0,
  DPM_VERIFICATION_FAILED = 1, /* a verification batch reported failures */
  DPM_PARSE_ERROR = 2,         /* malformed scenario text */
  DPM_DOMAIN_ERROR = 3,        /* invariant violation / invalid argument */
  DPM_NULL_ARGUMENT = 4,
  DPM_INTERNAL_ERROR = 5
} dpm_status;

typedef enum dpm_regime {
  DPM_REGIME_PROFITABLE = 0,
  DPM_REGIME_BREAK_EVEN = 1,
  DPM_REGIME_NO_TRADE = 2
} dpm_regime;

typedef enum dpm_sweep_variable {
  DPM_SWEEP_K = 0,
  DPM_SWEEP_Q = 1,
  DPM_SWEEP_P = 2,
  DPM_SWEEP_GAMMA = 3
} dpm_sweep_variable;

typedef enum dpm_grid_scale {
  DPM_SCALE_LINEAR = 0,
  DPM_SCALE_LOG = 1
} dpm_grid_scale;

/* Scenario file accepted even when p lies outside (1/2, 1]; used by the
 * arbitrage counterexample tooling only. */
#define DPM_PARSE_ALLOW_OUT_OF_RANGE_P 1u

typedef struct dpm_scenario dpm_scenario; /* opaque: query + market instance */

DPM_API const char* dpm_version(void);
DPM_API const char* dpm_error_message(void);
DPM_API const char* dpm_regime_name(int regime);

DPM_API dpm_status dpm_scenario_load(const char* path, unsigned flags,
                                     dpm_scenario** out);
DPM_API dpm_status dpm_scenario_parse(const char* text, unsigned flags,
                                      dpm_scenario** out);
DPM_API void dpm_scenario_free(dpm_scenario* scenario);

DPM_API dpm_status dpm_scenario_dimension(const dpm_scenario* scenario,
                                          size_t* out);
DPM_API dpm_status dpm_scenario_exponent(const dpm_scenario* scenario,
                                         double* out);

typedef struct dpm_sweep_request {
  int variable; /* dpm_sweep_variable */
  double lo;
  double hi;
  int points;
  int scale; /* dpm_grid_scale */
} dpm_sweep_request;

/* *present is 0 when the scenario file carries no sweep block. */
DPM_API dpm_status dpm_scenario_sweep_request(const dpm_scenario* scenario,
                                              dpm_sweep_request* out,
                                              int* present);

typedef struct dpm_classification {
  double intensity;       /* A(q) */
  double gamma_threshold; /* Gamma(q) */
  double two_p_gamma;     /* 2 p Gamma(q) */
  int regime;             /* dpm_regime */
} dpm_classification;

DPM_API dpm_status dpm_classify(const dpm_scenario* scenario,
                                dpm_classification* out);

typedef struct dpm_equilibrium_result {
  int regime;         /* dpm_regime */
  int k_indifferent;  /* 1: any k > 0 is optimal; k_star not meaningful */
  double k_star;
  int no_trade;       /* 1: buyer walks away; sigma_star not meaningful */
  double sigma_star;
  double maker_profit;  /* Psi* */
  double buyer_utility; /* Phi* */
  int has_k_lower;      /* knees populated only in the Profitable regime */
  double k_lower;
  int has_k_upper;
  double k_upper;
} dpm_equilibrium_result;

DPM_API dpm_status dpm_stackelberg_equilibrium(const dpm_scenario* scenario,
                                               dpm_equilibrium_result* out);

/* Stage II response to a posted k; *no_trade set to 1 when the buyer
 * rejects every finite variance. */
DPM_API dpm_status dpm_buyer_best_response(const dpm_scenario* scenario,
                                           double k, int* no_trade,
                                           double* sigma);

DPM_API dpm_status dpm_maker_profit_curve(const dpm_scenario* scenario,
                                          double k, double* out);
DPM_API dpm_status dpm_balanced_price(const dpm_scenario* scenario,
                                      double sigma, double k, double* out);
DPM_API dpm_status dpm_buyer_utility(const dpm_scenario* scenario,
                                     double sigma, double k, double* out);
DPM_API dpm_status dpm_maker_utility(const dpm_scenario* scenario,
                                     double sigma, double k, double* out);

/* Noisy answer to the scenario query over `items` (length must match the
 * scenario dimension); deterministic in `seed`. */
DPM_API dpm_status dpm_laplace_answer(const dpm_scenario* scenario,
                                      const double* items, size_t count,
                                      double sigma, uint64_t seed,
                                      double* out);

/* Runs the sweep and returns the CSV document (header row included).
 * Free with dpm_buffer_free. Output is byte-identical across runs for
 * identical inputs. */
DPM_API dpm_status dpm_sweep_csv(const dpm_scenario* scenario,
                                 const dpm_sweep_request* request,
                                 char** csv_out);

DPM_API void dpm_buffer_free(char* buffer);

typedef struct dpm_verify_summary {
  int oracle_total;
  int oracle_passed;
  int profitable_total;
  int profitable_passed;
  int breakeven_total;
  int breakeven_passed;
  int notrade_total;
  int notrade_passed;
  int arbitrage_total;
  int arbitrage_passed;
  int has_failing_seed;
  uint64_t first_failing_seed;
} dpm_verify_summary;

/* `instances` randomized closed-form-vs-oracle comparisons plus `instances`
 * arbitrage checks (or the counterexample hunt when the scenario exponent
 * lies outside (1/2, 1]). Returns DPM_VERIFICATION_FAILED when any check
 * fails; *report_out (optional) receives a human-readable summary. */
DPM_API dpm_status dpm_verify(const dpm_scenario* scenario, int instances,
                              uint64_t seed, dpm_verify_summary* out,
                              char** report_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DPMARKET_DPMARKET_H */
