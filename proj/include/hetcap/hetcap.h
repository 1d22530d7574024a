/* hetcap C interface.
 *
 * Every function returns an hc_status. On failure a message describing the
 * problem is kept per thread and can be read with hc_last_error() until the
 * next call on that thread. Handles are opaque and must be released with the
 * matching *_free function; passing NULL to a free function is a no-op.
 */
#ifndef HETCAP_H
#define HETCAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32) && defined(HC_BUILDING_LIBRARY)
#define HC_API __declspec(dllexport)
#elif defined(_WIN32)
#define HC_API __declspec(dllimport)
#else
#define HC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hc_status {
  HC_OK = 0,
  HC_ERR_INPUT = 1,
  HC_ERR_RESOLUTION = 2,
  HC_ERR_PARAMETER = 3,
  HC_ERR_DOMAIN_TOO_SMALL = 4,
  HC_ERR_NUMERICAL = 5,
  HC_ERR_PRECONDITION = 6,
  HC_ERR_CONFIG = 7,
  HC_ERR_IO = 8,
  HC_ERR_NULL_ARGUMENT = 98,
  HC_ERR_INTERNAL = 99
} hc_status;

typedef struct hc_config hc_config;
typedef struct hc_integrand hc_integrand;

HC_API const char* hc_version(void);
HC_API const char* hc_status_name(hc_status status);
/* Message of the last failed call on this thread, "" when there is none. */
HC_API const char* hc_last_error(void);

HC_API hc_status hc_set_threads(int n);

/* Parses a key=value document. overrides holds n_overrides extra
 * "key=value" strings applied afterwards (may be NULL when n_overrides is 0).
 * Problems are reported as HC_ERR_CONFIG with one "where: key: reason" line
 * per problem in hc_last_error(). */
HC_API hc_status hc_config_parse(const char* text, const char* const* overrides, size_t n_overrides,
                                 hc_config** out);
HC_API void hc_config_free(hc_config* config);
/* Name of the configured command; the pointer lives as long as the handle. */
HC_API hc_status hc_config_command(const hc_config* config, const char** out);

/* Runs the configured command, writing its CSV and JSON into out_dir.
 * exit_code receives 0 (success), 1 (numerical or I/O failure or a failed
 * check) or 2 (bad input). The status is HC_OK whenever the run itself was
 * attempted; the outcome is in exit_code. log_to_stderr != 0 prints a short
 * summary to stderr. */
HC_API hc_status hc_run(const hc_config* config, const char* out_dir, int log_to_stderr, int* exit_code);

/* Preset integrands: "constant" (c |xi|^d), "sinusoidal", "laminate",
 * "checkerboard". */
HC_API hc_status hc_integrand_preset(const char* name, int d, double c, hc_integrand** out);
HC_API void hc_integrand_free(hc_integrand* integrand);
HC_API hc_status hc_integrand_eval(const hc_integrand* integrand, const double* x, const double* xi, double* out);
HC_API hc_status hc_integrand_bounds(const hc_integrand* integrand, double* alpha, double* beta);

HC_API hc_status hc_analytic_capacity(int d, double r, double R, double* out);
/* Discrete minimum on the annulus r < |x| < R (d = 2, x-independent
 * integrand). Zero resolutions select the presets. */
HC_API hc_status hc_annulus_minimum(const hc_integrand* integrand, double r, double R, int per_log_radius,
                                    int n_angular, double* out);
HC_API hc_status hc_c_lambda(double phi, double chom, double lambda, int d, double* out);
HC_API hc_status hc_two_well_min(double a, double b, int d, double* x_star, double* value);
HC_API hc_status hc_critical_period(double eps, int d, double* out);

#ifdef __cplusplus
}
#endif

#endif /* HETCAP_H */
