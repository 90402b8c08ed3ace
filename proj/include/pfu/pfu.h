/* C interface to the practically-sufficient-follow-up toolkit.
 *
 * All functions return a pfu_status. On failure the message of the most
 * recent error on the calling thread is available from pfu_last_error().
 * Strings returned through char** out-parameters are owned by the caller
 * and released with pfu_string_free().
 */
#ifndef PFU_PFU_H
#define PFU_PFU_H

#include <stddef.h>
#include <stdint.h>

#if defined(PFU_BUILDING_LIBRARY)
#define PFU_API __attribute__((visibility("default")))
#else
#define PFU_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pfu_status
{
  PFU_OK = 0,
  PFU_ERR_INVALID = 2,    /* violated precondition or malformed input */
  PFU_ERR_DEGENERATE = 3, /* computation undefined for this data */
  PFU_ERR_IO = 4,         /* file could not be read or written */
  PFU_ERR_INTERNAL = 5
} pfu_status;

typedef struct pfu_sample pfu_sample;
typedef struct pfu_config pfu_config;
typedef struct pfu_qtable pfu_qtable;
typedef struct pfu_table pfu_table;
typedef struct pfu_setting pfu_setting;

PFU_API const char* pfu_version(void);
PFU_API const char* pfu_last_error(void);
PFU_API void pfu_string_free(char* s);

/* samples */
PFU_API pfu_status pfu_sample_create(const double* times,
                                     const int* status,
                                     size_t n,
                                     pfu_sample** out);
PFU_API pfu_status pfu_sample_load_csv(const char* path,
                                       const char* time_column,
                                       const char* status_column,
                                       pfu_sample** out);
PFU_API pfu_status pfu_sample_parse_csv(const char* text,
                                        const char* time_column,
                                        const char* status_column,
                                        pfu_sample** out);
PFU_API pfu_status pfu_sample_apply_cutoff(const pfu_sample* sample,
                                           double cutoff,
                                           pfu_sample** out);
PFU_API pfu_status pfu_sample_size(const pfu_sample* sample, size_t* n);
PFU_API pfu_status pfu_sample_events(const pfu_sample* sample, size_t* events);
PFU_API pfu_status pfu_sample_max_time(const pfu_sample* sample, double* out);
PFU_API void pfu_sample_free(pfu_sample* sample);

/* test configuration
 *
 * Keys: epsilon, tau, alpha, a, c, tau_g ("max-obs" or a number), h, h0,
 * bootstrap_reps, tail_start, seed, gamma, qn_critical, threads. Values are
 * given as text; an empty value unsets an optional key. */
PFU_API pfu_status pfu_config_create(pfu_config** out);
PFU_API pfu_status pfu_config_set(pfu_config* cfg, const char* key, const char* value);
PFU_API pfu_status pfu_config_clone(const pfu_config* cfg, pfu_config** out);
PFU_API void pfu_config_free(pfu_config* cfg);

/* quantile tables of D_R[W(t)](1) */
PFU_API pfu_status pfu_qtable_default(pfu_qtable** out);
PFU_API pfu_status pfu_qtable_read(const char* path, pfu_qtable** out);
PFU_API pfu_status pfu_qtable_simulate(const double* levels,
                                       size_t n_levels,
                                       size_t replications,
                                       double grid_step,
                                       double horizon,
                                       uint64_t seed,
                                       unsigned threads,
                                       pfu_qtable** out);
PFU_API pfu_status pfu_qtable_write(const pfu_qtable* table, const char* path);
PFU_API pfu_status pfu_qtable_to_text(const pfu_qtable* table, char** out);
PFU_API pfu_status pfu_qtable_quantile(const pfu_qtable* table, double level, double* out);
PFU_API pfu_status pfu_qtable_cdf(const pfu_qtable* table, double x, double* out);
PFU_API void pfu_qtable_free(pfu_qtable* table);

/* result tables */
PFU_API pfu_status pfu_table_to_csv(const pfu_table* table, char** out);
PFU_API pfu_status pfu_table_to_json(const pfu_table* table, char** out);
PFU_API pfu_status pfu_table_rows(const pfu_table* table, size_t* rows);
PFU_API pfu_status pfu_table_set_meta(pfu_table* table, const char* key, const char* value);
/* Counts rows whose status column is "invalid" or "degenerate". */
PFU_API pfu_status pfu_table_error_counts(const pfu_table* table,
                                          size_t* invalid,
                                          size_t* degenerate);
PFU_API void pfu_table_free(pfu_table* table);

/* Runs the comma-separated `methods` ("sg", "grenander", "alpha-n",
 * "tilde-alpha-n", "qn" or "all") for every cutoff. n_cutoffs = 0 analyses
 * the full sample. `qtable` may be NULL for the built-in table. Per-cell
 * failures are recorded in the table rather than returned. */
PFU_API pfu_status pfu_what_if(const pfu_sample* sample,
                               const pfu_config* cfg,
                               const char* methods,
                               const double* cutoffs,
                               size_t n_cutoffs,
                               const pfu_qtable* qtable,
                               pfu_table** out);

/* JSON dumps: KME, censoring KME and majorant; bootstrap differences. */
PFU_API pfu_status pfu_dump_estimators(const pfu_sample* sample,
                                       const pfu_config* cfg,
                                       char** json);
PFU_API pfu_status pfu_dump_bootstrap(const pfu_sample* sample,
                                      const pfu_config* cfg,
                                      char** json);

/* simulation settings
 *
 * Keys: p, n, mass, lambda, lambda_c, delta. */
PFU_API pfu_status pfu_setting_create(int setting, pfu_setting** out);
PFU_API pfu_status pfu_setting_set(pfu_setting* s, const char* key, double value);
PFU_API pfu_status pfu_setting_quantile(const pfu_setting* s, const char* label, double* out);
PFU_API void pfu_setting_free(pfu_setting* s);

/* `grid` uses the labels q1..q19 ("q1..q12", "q13..q19", "q1,q6", "all"; an
 * empty string selects the default grid). */
PFU_API pfu_status pfu_simulate_rejection(const pfu_setting* s,
                                          const char* grid,
                                          const char* methods,
                                          size_t reps,
                                          const pfu_config* cfg,
                                          const pfu_qtable* qtable,
                                          uint64_t seed,
                                          unsigned threads,
                                          pfu_table** out);
PFU_API pfu_status pfu_simulate_censoring(const pfu_setting* s,
                                          const char* grid,
                                          size_t subjects,
                                          uint64_t seed,
                                          unsigned threads,
                                          pfu_table** out);
PFU_API pfu_status pfu_calibrate_qn(const pfu_setting* s,
                                    const char* label,
                                    size_t reps,
                                    double alpha,
                                    uint64_t seed,
                                    unsigned threads,
                                    double* critical);

#ifdef __cplusplus
}
#endif

#endif
