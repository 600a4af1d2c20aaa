/* prodsys C API: grid models of product systems of Hilbert spaces.
 *
 * All functions return a prodsys_status; outputs are returned through
 * pointers. Handles are opaque and must be released with the matching
 * _free function. Strings returned through char** are heap-allocated and
 * must be released with prodsys_string_free. On any failure a
 * human-readable message is available from prodsys_last_error() until the
 * next call on the same thread.
 */

#ifndef PRODSYS_H
#define PRODSYS_H

#include <stddef.h>

#if defined(_WIN32)
#define PRODSYS_EXPORT __declspec(dllexport)
#else
#define PRODSYS_EXPORT __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum prodsys_status {
  PRODSYS_OK = 0,
  PRODSYS_ERR_INVALID_ARGUMENT = 1,
  PRODSYS_ERR_SIZE_LIMIT = 2,
  PRODSYS_ERR_BAD_SYSTEM = 3,
  PRODSYS_ERR_INTERNAL = 4
} prodsys_status;

typedef struct prodsys_system prodsys_system;

PRODSYS_EXPORT const char* prodsys_version(void);
PRODSYS_EXPORT const char* prodsys_last_error(void);

/* Grid CCR flow of index k at grid level `level` (2^level cells on [0,1]).
 * Slices above slice_cap dimensions are refused; pass 0 for the default. */
PRODSYS_EXPORT prodsys_status prodsys_ccr_build(int k, int level, long long slice_cap,
                                                prodsys_system** out);

/* Restriction to configurations with at most max_particles points. */
PRODSYS_EXPORT prodsys_status prodsys_ccr_truncate(const prodsys_system* sys, int max_particles,
                                                   prodsys_system** out);

PRODSYS_EXPORT prodsys_status prodsys_tensor(const prodsys_system* a, const prodsys_system* b,
                                             prodsys_system** out);

PRODSYS_EXPORT prodsys_status prodsys_system_from_json(const char* json, prodsys_system** out);
PRODSYS_EXPORT prodsys_status prodsys_system_to_json(const prodsys_system* sys, char** json_out);

PRODSYS_EXPORT int prodsys_system_level(const prodsys_system* sys);
/* Dimension of the slice at m grid cells, 1 <= m <= 2^level; 0 on error. */
PRODSYS_EXPORT long long prodsys_system_slice_dim(const prodsys_system* sys, int m);

/* Structure report as JSON: isometry and coassociativity defects, pass
 * flag at the given tolerance. */
PRODSYS_EXPORT prodsys_status prodsys_check_system(const prodsys_system* sys, double tol,
                                                   char** report_json_out);

/* Root-space dimension of a seeded normalized unit (the index). */
PRODSYS_EXPORT prodsys_status prodsys_index(const prodsys_system* sys,
                                            unsigned long long seed, int* index_out);

/* Run a verification suite described by a JSON config
 * {"suite","k","level","coarse_level","tol_identity","tol_spectral",
 *  "state","seed","slice_cap"} and return the JSON report. The report is
 * returned (status PRODSYS_OK) whether or not its checks all pass; the
 * caller inspects the "passed" field. */
PRODSYS_EXPORT prodsys_status prodsys_run_suite(const char* config_json, char** report_json_out);

/* Build and serialize a named object: spec {"object": "ccr-system" |
 * "truncated-system" | "vacuum-family" | "vacuum-root-family" |
 * "distribution" | "report", ...params}. */
PRODSYS_EXPORT prodsys_status prodsys_dump(const char* spec_json, char** json_out);

PRODSYS_EXPORT void prodsys_system_free(prodsys_system* sys);
PRODSYS_EXPORT void prodsys_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* PRODSYS_H */
