/*
 * C interface to the stabgknock library: controlled variable selection for
 * partially linear models via generalized knockoffs, joint screening, and a
 * simulation harness.
 *
 * All functions return SGK_OK (0) on success or a nonzero error code; the
 * message for the last failing call on the current thread is available via
 * sgk_last_error(). Objects are opaque handles released with the matching
 * *_free function.
 */
#ifndef STABGKNOCK_H
#define STABGKNOCK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SGK_API __declspec(dllexport)
#else
#define SGK_API __attribute__((visibility("default")))
#endif

#define SGK_OK 0
#define SGK_ERR_VALIDATION 2
#define SGK_ERR_NUMERIC 3

typedef struct sgk_dataset sgk_dataset;
typedef struct sgk_config sgk_config;
typedef struct sgk_result sgk_result;

SGK_API const char* sgk_version(void);

/* Thread-local message describing the most recent failure. */
SGK_API const char* sgk_last_error(void);

/* Datasets ---------------------------------------------------------------- */

/* CSV with a header row; `response` and `covariate` name the Y and U
 * columns, every remaining column becomes a feature. */
SGK_API int sgk_dataset_load_csv(const char* path, const char* response, const char* covariate,
                                 sgk_dataset** out);

/* x is row-major n*p. */
SGK_API int sgk_dataset_create(int n, int p, const double* x, const double* u, const double* y,
                               sgk_dataset** out);

SGK_API int sgk_dataset_dims(const sgk_dataset* d, int* n, int* p);
SGK_API void sgk_dataset_free(sgk_dataset* d);

/* Configuration ----------------------------------------------------------- */

SGK_API int sgk_config_create(sgk_config** out);

/* Keys mirror the key=value config-file format (q, mode, statistic, L, seed,
 * spline.order, k, n1, ...). */
SGK_API int sgk_config_set(sgk_config* cfg, const char* key, const char* value);
SGK_API int sgk_config_load_file(sgk_config* cfg, const char* path);
SGK_API void sgk_config_free(sgk_config* cfg);

/* Commands ---------------------------------------------------------------- */

SGK_API int sgk_select(const sgk_dataset* d, const sgk_config* cfg, sgk_result** out);
SGK_API int sgk_screen(const sgk_dataset* d, const sgk_config* cfg, sgk_result** out);
SGK_API int sgk_knockoff_check(const sgk_dataset* d, const sgk_config* cfg, sgk_result** out);
SGK_API int sgk_simulate(const sgk_config* cfg, sgk_result** out);

/* Results ----------------------------------------------------------------- */

/* Versioned JSON result document; byte-identical across runs with the same
 * config and seed. Owned by the result handle. */
SGK_API const char* sgk_result_json(const sgk_result* r);

/* Run manifest (JSON, includes timestamps). */
SGK_API const char* sgk_result_manifest_json(const sgk_result* r);

/* Metrics CSV; NULL unless produced by sgk_simulate. */
SGK_API const char* sgk_result_csv(const sgk_result* r);

SGK_API void sgk_result_free(sgk_result* r);

#ifdef __cplusplus
}
#endif

#endif /* STABGKNOCK_H */
