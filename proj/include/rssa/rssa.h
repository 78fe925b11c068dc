#ifndef RSSA_RSSA_H
#define RSSA_RSSA_H

#include <stddef.h>

#if defined(RSSA_BUILDING_LIBRARY)
#define RSSA_API __attribute__((visibility("default")))
#else
#define RSSA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Offline products of one controller; immutable once built, shareable
 * across threads. */
typedef struct rssa_artifact rssa_artifact;

/* Online state of one closed loop (warm start). Not thread-safe. */
typedef struct rssa_controller rssa_controller;

typedef enum rssa_status {
  RSSA_OK = 0,
  RSSA_ERR_INVALID_ARGUMENT = 1,
  RSSA_ERR_EMPTY_SET = 2,
  RSSA_ERR_CONVERGENCE = 3,
  RSSA_ERR_NO_STEADY_STATE = 4,
  RSSA_ERR_STRUCTURE = 5,
  RSSA_ERR_FINITE_DETERMINATION = 6,
  RSSA_ERR_INFEASIBLE = 7,
  RSSA_ERR_MAX_ITER = 8,
  RSSA_ERR_CONDITION_VIOLATED = 9,
  RSSA_ERR_CONFIG = 10,
  RSSA_ERR_IO = 11,
  RSSA_ERR_DEGENERATE = 12,
  RSSA_ERR_INTERNAL = 13,
  /* rssa_check found a failing invariant. */
  RSSA_ERR_CHECK_FAILED = 14
} rssa_status;

RSSA_API const char* rssa_version(void);
RSSA_API const char* rssa_status_name(rssa_status status);

/* Message and stage of the last failure on the calling thread. Valid until
 * the next call on that thread. */
RSSA_API const char* rssa_last_error(void);
RSSA_API const char* rssa_last_error_stage(void);

/* Strings returned through char** out-parameters are released here. */
RSSA_API void rssa_string_free(char* s);

/* Config as a JSON document. overrides_json (may be NULL) is merge-patched
 * into the config before parsing. */
RSSA_API rssa_status rssa_precompute(const char* config_json, const char* overrides_json,
                                     rssa_artifact** out);
RSSA_API rssa_status rssa_precompute_file(const char* config_path, const char* overrides_json,
                                          rssa_artifact** out);
/* JSON text of the built-in quadrotor config. */
RSSA_API rssa_status rssa_drone_preset(double beta, int baseline, char** config_json);

RSSA_API rssa_status rssa_artifact_save(const rssa_artifact* art, const char* path);
RSSA_API rssa_status rssa_artifact_load(const char* path, rssa_artifact** out);
RSSA_API void rssa_artifact_free(rssa_artifact* art);

/* Any pointer may be NULL. */
RSSA_API rssa_status rssa_artifact_dims(const rssa_artifact* art, int* n, int* p, int* m,
                                        int* n_theta, int* horizon);
/* JSON summary: kind, config hash, s, alpha, gamma*, tightened bounds, rows. */
RSSA_API rssa_status rssa_artifact_info(const rssa_artifact* art, char** info_json);

RSSA_API rssa_status rssa_controller_create(const rssa_artifact* art, rssa_controller** out);
RSSA_API void rssa_controller_free(rssa_controller* ctrl);
/* Drops the warm start. */
RSSA_API rssa_status rssa_controller_reset(rssa_controller* ctrl);

/* One control step at measured state x (length n). r (length m), x_des
 * (length n), u_des (length p) may be NULL to use the artifact's config
 * reference. u_out (length p) receives the applied input; theta_out
 * (length n_theta) and cost_out may be NULL. An infeasible QP returns
 * RSSA_ERR_INFEASIBLE. */
RSSA_API rssa_status rssa_controller_step(rssa_controller* ctrl, const double* x,
                                          const double* r, const double* x_des,
                                          const double* u_des, double* u_out, double* theta_out,
                                          double* cost_out);

/* First-step feasibility at x (one LP). */
RSSA_API rssa_status rssa_first_step_feasible(const rssa_artifact* art, const double* x,
                                              int* feasible);

/* Experiments. options_json (may be NULL) selects seed, beta, horizon,
 * runs, threads, timing; missing keys come from the artifact's config.
 * report_json (may be NULL) receives a JSON summary. */
RSSA_API rssa_status rssa_simulate_csv(const rssa_artifact* art, const char* options_json,
                                       const char* trace_path, char** report_json);
RSSA_API rssa_status rssa_montecarlo_csv(const rssa_artifact* art, const char* options_json,
                                         const char* summary_path, const char* stats_path,
                                         char** report_json);
RSSA_API rssa_status rssa_roa_csv(const rssa_artifact* art_rssa, const rssa_artifact* art_base,
                                  const char* options_json, const char* roa_path,
                                  char** report_json);

/* Invariant audit. Returns RSSA_ERR_CHECK_FAILED when any check fails;
 * report_json is filled in either case. */
RSSA_API rssa_status rssa_check(const rssa_artifact* art, const char* options_json,
                                char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* RSSA_RSSA_H */
