/* C interface to the ehlc library. Every call returns an ehlc_status;
 * ehlc_last_error() gives the message of the last failure on this thread. */
#ifndef EHLC_EHLC_H
#define EHLC_EHLC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef EHLC_BUILDING
#    define EHLC_API __declspec(dllexport)
#  else
#    define EHLC_API __declspec(dllimport)
#  endif
#else
#  define EHLC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ehlc_status {
  EHLC_OK = 0,
  EHLC_NO_FEASIBLE_TRANSMISSION = 1,
  EHLC_DRAIN_BEYOND_PEAK = 2,
  EHLC_INFEASIBLE_DELIVERY = 3,
  EHLC_SOLVER_DID_NOT_CONVERGE = 4,
  EHLC_NO_ROOT_IN_BRACKET = 5,
  EHLC_BUDGET_EXCEEDED = 6,
  EHLC_CONFIG_INVALID = 7,
  EHLC_INVALID_ARGUMENT = 8,
  EHLC_IO_ERROR = 9,
  EHLC_CHECK_FAILED = 10,
  EHLC_INTERNAL = 99
} ehlc_status;

typedef enum ehlc_strategy { EHLC_LTM = 0, EHLC_LSC = 1 } ehlc_strategy;

typedef struct ehlc_config ehlc_config;
typedef struct ehlc_result ehlc_result;

typedef struct ehlc_row {
  const char* sweep_var;
  const char* sweep_value;
  const char* strategy;
  const char* mode;
  double avg_rate_nats; /* nat/s */
  double avg_rate_bits; /* bit/s */
  double stderr_nats;
  size_t trials;
  uint64_t seed;
  const char* error; /* empty string when the row is valid */
} ehlc_row;

EHLC_API const char* ehlc_last_error(void);
EHLC_API const char* ehlc_status_name(ehlc_status s);
/* frees strings returned through char** out-parameters */
EHLC_API void ehlc_string_free(char* s);

EHLC_API ehlc_status ehlc_config_load(const char* path, ehlc_config** out);
EHLC_API ehlc_status ehlc_config_parse(const char* json_text, ehlc_config** out);
EHLC_API void ehlc_config_free(ehlc_config* cfg);
EHLC_API ehlc_status ehlc_config_set_seed(ehlc_config* cfg, uint64_t seed);
EHLC_API ehlc_status ehlc_config_set_strategy(ehlc_config* cfg, ehlc_strategy st);
/* comma separated, e.g. "dp,mv,greedy" */
EHLC_API ehlc_status ehlc_config_set_modes(ehlc_config* cfg, const char* modes);
/* drops the sweep so a run yields one row per mode */
EHLC_API ehlc_status ehlc_config_clear_sweep(ehlc_config* cfg);

EHLC_API ehlc_status ehlc_run(const ehlc_config* cfg, ehlc_result** out);
EHLC_API void ehlc_result_free(ehlc_result* res);
EHLC_API size_t ehlc_result_rows(const ehlc_result* res);
/* pointers inside *row live as long as res */
EHLC_API ehlc_status ehlc_result_row(const ehlc_result* res, size_t i, ehlc_row* row);
EHLC_API ehlc_status ehlc_result_csv(const ehlc_result* res, char** csv);

/* Offline allocation for harvest.profile (or K frames drawn with the seed),
 * reported as a JSON document. */
EHLC_API ehlc_status ehlc_solve_offline(const ehlc_config* cfg, char** json_out);

/* Solvers against the grid oracle on every harvest value of the config, one
 * frame starting at battery.b_0. *passed is 1 when every check holds. */
EHLC_API ehlc_status ehlc_oracle_check(const ehlc_config* cfg, char** json_out, int* passed);

/* Single frame. Gains are raw (divided by n0*bandwidth internally). */
typedef struct ehlc_frame_params {
  double tau, p_c, bandwidth, n0;
} ehlc_frame_params;
typedef struct ehlc_battery_params {
  double r, v_b, b_max, b_0; /* b_max may be INFINITY */
} ehlc_battery_params;

EHLC_API ehlc_status ehlc_solve_single(ehlc_strategy st, double u, const ehlc_frame_params* frame,
                                       const ehlc_battery_params* bat, const double* h,
                                       const double* p, size_t n, double* objective,
                                       double* tx_time);

#ifdef __cplusplus
}
#endif

#endif
