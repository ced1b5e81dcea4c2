#ifndef EZMFG_EZMFG_H
#define EZMFG_EZMFG_H

#include <stddef.h>
#include <stdint.h>

#if defined(EZMFG_BUILDING_LIBRARY)
#define EZMFG_API __attribute__((visibility("default")))
#else
#define EZMFG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure ezmfg_last_error() holds a
   message for the calling thread until its next failing call. */
typedef enum ezmfg_status {
  EZMFG_OK = 0,
  EZMFG_E_ARGUMENT = 1,       /* null handle, bad index, unknown check name */
  EZMFG_E_CONFIG = 2,         /* unreadable file, JSON or schema error */
  EZMFG_E_VALIDATION = 3,     /* parameters outside the model's regime */
  EZMFG_E_NOT_APPLICABLE = 4, /* check cannot run on this configuration */
  EZMFG_E_NUMERICAL = 5,      /* solver or utility evaluation left its domain */
  EZMFG_E_IO = 6,             /* output could not be written */
  EZMFG_E_INTERNAL = 7
} ezmfg_status;

typedef struct ezmfg_config ezmfg_config;
typedef struct ezmfg_mfg ezmfg_mfg;
typedef struct ezmfg_nplayer ezmfg_nplayer;
typedef struct ezmfg_report ezmfg_report;

/* Optional command-line style overrides; zero-initialize to use none. */
typedef struct ezmfg_overrides {
  int has_dt;
  double dt; /* replaces grid.n_cells with T / dt */
  int has_paths;
  uint64_t paths;
  int has_seed;
  uint64_t seed;
  const double* eps; /* best-response perturbations; used when n_eps > 0 */
  size_t n_eps;
} ezmfg_overrides;

EZMFG_API const char* ezmfg_version(void);
EZMFG_API const char* ezmfg_last_error(void);
EZMFG_API const char* ezmfg_status_name(ezmfg_status status);
/* Frees strings returned through char** out-parameters. */
EZMFG_API void ezmfg_string_free(char* s);

/* Configuration */
EZMFG_API ezmfg_status ezmfg_config_load(const char* path, const ezmfg_overrides* overrides,
                                         ezmfg_config** out);
EZMFG_API ezmfg_status ezmfg_config_parse(const char* json_text, const ezmfg_overrides* overrides,
                                          ezmfg_config** out);
EZMFG_API void ezmfg_config_free(ezmfg_config* config);
/* Normalized JSON with every coefficient written per cell. */
EZMFG_API ezmfg_status ezmfg_config_to_json(const ezmfg_config* config, char** out);
/* EZMFG_E_VALIDATION with all violations in the error message. */
EZMFG_API ezmfg_status ezmfg_config_validate(const ezmfg_config* config);
EZMFG_API ezmfg_status ezmfg_config_validate_nplayer(const ezmfg_config* config);
EZMFG_API size_t ezmfg_config_n_types(const ezmfg_config* config);
EZMFG_API uint64_t ezmfg_config_seed(const ezmfg_config* config);
/* Writes meta.json (config hash, seed, versions) into dir. */
EZMFG_API ezmfg_status ezmfg_write_meta(const ezmfg_config* config, const char* dir, const char* command);

/* Mean-field equilibrium. Solving validates first. */
EZMFG_API ezmfg_status ezmfg_mfg_solve(const ezmfg_config* config, ezmfg_mfg** out);
EZMFG_API void ezmfg_mfg_free(ezmfg_mfg* eq);
EZMFG_API size_t ezmfg_mfg_n_types(const ezmfg_mfg* eq);
EZMFG_API size_t ezmfg_mfg_n_points(const ezmfg_mfg* eq);
/* Grid-point values; cell data at T is its left limit, c_star at T is 1. */
EZMFG_API ezmfg_status ezmfg_mfg_point(const ezmfg_mfg* eq, size_t type, size_t point, double* t,
                                       double* pi_star, double* c_star, double* z0, double* y_tilde);
EZMFG_API ezmfg_status ezmfg_mfg_riccati(const ezmfg_mfg* eq, size_t type, size_t cell, double* a,
                                         double* b, double* d);
/* equilibrium.csv */
EZMFG_API ezmfg_status ezmfg_mfg_write_csv(const ezmfg_mfg* eq, const char* dir);

/* N-player equilibrium of the game described by the config's nplayer block. */
EZMFG_API ezmfg_status ezmfg_nplayer_solve(const ezmfg_config* config, ezmfg_nplayer** out);
EZMFG_API void ezmfg_nplayer_free(ezmfg_nplayer* eq);
EZMFG_API size_t ezmfg_nplayer_n_players(const ezmfg_nplayer* eq);
EZMFG_API ezmfg_status ezmfg_nplayer_point(const ezmfg_nplayer* eq, size_t player, size_t point,
                                           double* t, double* pi, double* c, double* zi0);
/* nplayer.csv */
EZMFG_API ezmfg_status ezmfg_nplayer_write_csv(const ezmfg_nplayer* eq, const char* dir);

/* Verification. check is one of riccati, fixed-point, best-response,
   recursion, nplayer-limit, power-reduction, or "all" (inapplicable checks
   are then skipped). */
EZMFG_API ezmfg_status ezmfg_verify(const ezmfg_config* config, const ezmfg_mfg* eq, const char* check,
                                    ezmfg_report** out);
EZMFG_API void ezmfg_report_free(ezmfg_report* report);
EZMFG_API int ezmfg_report_passed(const ezmfg_report* report);
EZMFG_API size_t ezmfg_report_n_checks(const ezmfg_report* report);
EZMFG_API const char* ezmfg_report_check_name(const ezmfg_report* report, size_t i);
EZMFG_API int ezmfg_report_check_passed(const ezmfg_report* report, size_t i);
EZMFG_API int ezmfg_report_check_skipped(const ezmfg_report* report, size_t i);
EZMFG_API double ezmfg_report_check_statistic(const ezmfg_report* report, size_t i);
EZMFG_API const char* ezmfg_report_check_detail(const ezmfg_report* report, size_t i);
EZMFG_API ezmfg_status ezmfg_report_to_json(const ezmfg_report* report, char** out);
/* verify.json */
EZMFG_API ezmfg_status ezmfg_report_write_json(const ezmfg_report* report, const char* dir);

#ifdef __cplusplus
}
#endif

#endif
