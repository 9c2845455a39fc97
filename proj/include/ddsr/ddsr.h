/* C interface to the delay-Doppler super-resolution library.
 *
 * Every call returns a ddsr_status. On failure ddsr_last_error() holds a
 * message for the calling thread until its next ddsr_* call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with ddsr_string_free. Handles are released with their _free
 * function; passing NULL to any _free function is a no-op.
 */
#ifndef DDSR_H
#define DDSR_H

#include <stddef.h>
#include <stdint.h>

#if defined(DDSR_BUILDING_LIBRARY)
#define DDSR_API __attribute__((visibility("default")))
#else
#define DDSR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ddsr_status {
    DDSR_OK = 0,
    DDSR_ERR_ARGUMENT = 1,   /* null pointer or unusable argument */
    DDSR_ERR_CONFIG = 2,     /* invalid configuration or malformed input document */
    DDSR_ERR_NUMERIC = 3,    /* non-finite values, divergence, failed factorisation */
    DDSR_ERR_DOMAIN = 4,     /* value outside the mathematical domain */
    DDSR_ERR_DEGENERATE = 5, /* ill-conditioned least squares */
    DDSR_ERR_INTERNAL = 7
} ddsr_status;

typedef struct ddsr_measurement ddsr_measurement;
typedef struct ddsr_result ddsr_result;

DDSR_API const char* ddsr_version(void);
DDSR_API const char* ddsr_last_error(void);
DDSR_API const char* ddsr_status_name(ddsr_status status);
DDSR_API void ddsr_string_free(char* s);

/* Simulation. `scene_json` is either a scene document
 *   {"config": {...}, "targets": [...], "clutter": [...]}
 * or a scenario spec (recognised by "n_targets" or "preset"), in which case
 * trial `trial` is drawn and its seed is spec.seed + trial.
 * `options_json` may be NULL or hold {"seed", "ber", "constellation", "trial"}. */
DDSR_API ddsr_status ddsr_simulate(const char* scene_json, const char* options_json, ddsr_measurement** out);

DDSR_API ddsr_status ddsr_measurement_from_json(const char* json, ddsr_measurement** out);
DDSR_API ddsr_status ddsr_measurement_to_json(const ddsr_measurement* m, char** out);
DDSR_API ddsr_status ddsr_measurement_dims(const ddsr_measurement* m, int* M, int* N);
DDSR_API void ddsr_measurement_free(ddsr_measurement* m);

/* Estimation. `algorithm` is one of "anl1", "an", "csl1", "music" (or the
 * display names CS-ANL1, CS-AN, CS-L1, 2D-MUSIC). `options_json` may be NULL
 * or hold overrides: lambda, mu, rho, max_iters, tol_primal, tol_dual,
 * oversample, epsilon (atomic); gamma, M_grid, N_grid (csl1);
 * M_sub, N_sub, K_signal, grid_phi, grid_psi (music). */
DDSR_API ddsr_status ddsr_solve(const ddsr_measurement* m, const char* algorithm, const char* options_json,
                                ddsr_result** out);

/* Estimate document; atomic-norm results also carry nu_hat, z_hat, e_hat,
 * the solver configuration and residual history. */
DDSR_API ddsr_status ddsr_result_to_json(const ddsr_result* r, char** out);
DDSR_API ddsr_status ddsr_result_to_csv(const ddsr_result* r, char** out);
DDSR_API ddsr_status ddsr_result_path_count(const ddsr_result* r, size_t* count);
DDSR_API ddsr_status ddsr_result_path(const ddsr_result* r, size_t index, double* phi, double* psi, double* amp_re,
                                      double* amp_im);
/* Plot grid as CSV: |Q| for atomic results (grid oversample*M x oversample*N),
 * the MUSIC pseudo-spectrum, or |alpha'| on the CS-L1 dictionary grid. */
DDSR_API ddsr_status ddsr_result_spectrum_csv(const ddsr_result* r, int oversample, char** out);
DDSR_API void ddsr_result_free(ddsr_result* r);

/* Same as ddsr_result_spectrum_csv for a saved atomic result document
 * (needs "config" and "nu_hat"). */
DDSR_API ddsr_status ddsr_dual_spectrum_csv(const char* result_json, int oversample, char** out);
/* Certificate peaks (phi, psi, range_m, velocity_mps, magnitude) of a saved
 * atomic result document, thresholded with its "lambda". */
DDSR_API ddsr_status ddsr_dual_peaks_csv(const char* result_json, char** out);

/* Benchmark. `spec_json` is a scenario spec; `options_json` may be NULL or
 * hold {"algorithms": [...], "bers": [...], "trials", "max_iters", "tol",
 * "threads", "seed", "verbose"}. Any of the three outputs may be NULL. */
DDSR_API ddsr_status ddsr_scenario_preset(const char* name, char** spec_json);
DDSR_API ddsr_status ddsr_bench(const char* spec_json, const char* options_json, char** report_csv, char** raw_csv,
                                char** report_json);

#ifdef __cplusplus
}
#endif

#endif
