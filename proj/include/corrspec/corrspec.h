/*
 * corrspec C interface.
 *
 * Every fallible call returns a csp_status; on failure a thread-local message
 * is available from csp_last_error() until the next failing call on the same
 * thread. Opaque handles are created by *_create/run functions and released
 * with the matching *_destroy; destroy functions accept NULL.
 */
#ifndef CORRSPEC_CORRSPEC_H
#define CORRSPEC_CORRSPEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(CORRSPEC_BUILDING_LIBRARY)
#define CORRSPEC_API __attribute__((visibility("default")))
#else
#define CORRSPEC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum csp_status {
  CSP_OK = 0,
  CSP_INVALID_ARGUMENT = 1,
  CSP_UNMEASURABLE = 2,
  CSP_MODEL_MISCONFIGURED = 3,
  CSP_NULL_POINTER = 4,
  CSP_OUT_OF_RANGE = 5,
  CSP_INTERNAL = 6
} csp_status;

CORRSPEC_API const char *csp_version(void);
CORRSPEC_API const char *csp_last_error(void);
CORRSPEC_API const char *csp_status_name(csp_status status);

/* ---- clock species ---------------------------------------------------- */

typedef struct csp_clock_spec {
  double nu_hz;
  double t_prime_s;
  double detection_fidelity;
  double overhead_s;         /* per-probe dead time, duty-cycle model */
  double session_overhead_s; /* per-probe dead time, session bookkeeping */
} csp_clock_spec;

CORRSPEC_API csp_clock_spec csp_clock_spec_default(void);
CORRSPEC_API csp_status csp_clock_spec_validate(const csp_clock_spec *spec);

/* ---- closed-form relations -------------------------------------------- */

CORRSPEC_API csp_status csp_ramsey_transition_probability(double dphi, double *out);
CORRSPEC_API csp_status csp_joint_correlation_probability(double dphi_1, double dphi_2, double *out);
CORRSPEC_API csp_status csp_averaged_correlation(double delta_phi, double contrast, double *out);
CORRSPEC_API csp_status csp_lifetime_contrast(const csp_clock_spec *spec, double t, double *out);
CORRSPEC_API csp_status csp_instability(const csp_clock_spec *spec, double contrast, double t,
                                        double tau, double *out);
CORRSPEC_API csp_status csp_lifetime_limited_instability(const csp_clock_spec *spec, double t,
                                                         double tau, double *out);
CORRSPEC_API csp_status csp_scan_instability(const csp_clock_spec *spec, double contrast, double t,
                                             double tau, double *out);
CORRSPEC_API csp_status csp_optimal_probe_time(const csp_clock_spec *spec, double *out);
CORRSPEC_API csp_status csp_q_coherence(const csp_clock_spec *spec, double t_c, double *out);
CORRSPEC_API csp_status csp_q_spectroscopic(const csp_clock_spec *spec, double t, double *out);
CORRSPEC_API csp_status csp_duty_cycle_factor(const csp_clock_spec *spec, double t, double *out);
CORRSPEC_API csp_status csp_detection_contrast_factor(double fidelity_1, double fidelity_2,
                                                      double *out);
CORRSPEC_API csp_status csp_session_duration(const csp_clock_spec *spec, double t,
                                             uint64_t n_probes, double *out);

/* ---- fringe data and simulation --------------------------------------- */

typedef struct csp_fringe_dataset csp_fringe_dataset;

CORRSPEC_API csp_status csp_fringe_dataset_create(double t_s, csp_fringe_dataset **out);
CORRSPEC_API void csp_fringe_dataset_destroy(csp_fringe_dataset *data);
/* Points must be appended in strictly increasing phase order. */
CORRSPEC_API csp_status csp_fringe_dataset_add_point(csp_fringe_dataset *data, double delta_phi_z,
                                                     uint64_t n_correlated, uint64_t n_total);
CORRSPEC_API csp_status csp_fringe_dataset_t(const csp_fringe_dataset *data, double *t_s);
CORRSPEC_API csp_status csp_fringe_dataset_size(const csp_fringe_dataset *data, size_t *n);
CORRSPEC_API csp_status csp_fringe_dataset_point(const csp_fringe_dataset *data, size_t index,
                                                 double *delta_phi_z, uint64_t *n_correlated,
                                                 uint64_t *n_total);

typedef struct csp_sim_options {
  double y_offset_1;   /* fractional frequency offset of atom 1 */
  double y_offset_2;   /* fractional frequency offset of atom 2 */
  uint32_t dataset_id; /* separates datasets sharing a seed */
  uint32_t workers;
} csp_sim_options;

CORRSPEC_API csp_sim_options csp_sim_options_default(void);
/* out must hold n values. */
CORRSPEC_API csp_status csp_phase_grid(size_t n, double start, double step, double *out);
CORRSPEC_API csp_status csp_allocate_probes(uint64_t total, size_t points, uint64_t *out);
/* probes[i] interrogations at grid[i]; options may be NULL. */
CORRSPEC_API csp_status csp_simulate_fringe(const csp_clock_spec *spec, double t,
                                            const double *grid, const uint64_t *probes, size_t n,
                                            uint64_t seed, const csp_sim_options *options,
                                            csp_fringe_dataset **out);

/* ---- estimation ------------------------------------------------------- */

typedef struct csp_fringe_fit {
  double contrast;
  double phase0;
  double log_likelihood;
  double contrast_lower;
  double contrast_upper;
  double phase_lower;
  double phase_upper;
  int phase_identifiable;
  double contrast_sigma; /* larger interval half-width */
  double phase_sigma;    /* mean interval half-width; +inf when unidentifiable */
} csp_fringe_fit;

CORRSPEC_API csp_status csp_fit_fringe(const csp_fringe_dataset *data, csp_fringe_fit *out);

typedef struct csp_decay_point {
  double t_s;
  double contrast;
  double sigma;
} csp_decay_point;

typedef struct csp_coherence_fit {
  double t_c;
  double ci_lower;
  double ci_upper;
  double prior_lower;
  double prior_upper;
  double c0;
} csp_coherence_fit;

CORRSPEC_API csp_status csp_fit_contrast_decay(const csp_decay_point *points, size_t n,
                                               double prior_lower, double prior_upper,
                                               csp_coherence_fit *out);

typedef struct csp_phase_point {
  double t_s;
  double phase;
  double sigma;
} csp_phase_point;

typedef struct csp_drift_fit {
  double slope;
  double slope_err;
  double intercept;
  double intercept_err;
  double fractional_shift;
  double fractional_shift_err;
} csp_drift_fit;

CORRSPEC_API csp_status csp_fit_phase_drift(const csp_phase_point *points, size_t n,
                                            const csp_clock_spec *spec, csp_drift_fit *out);
CORRSPEC_API csp_status csp_unwrap_phases(const double *phases, size_t n, double *out);
CORRSPEC_API csp_status csp_extrapolate_sigma1s(double sigma, double duration_s, double *out);
CORRSPEC_API csp_status csp_fractional_uncertainty_from_phase(double phase_sigma, double t,
                                                              const csp_clock_spec *spec,
                                                              double *out);

typedef struct csp_allan_result csp_allan_result;

CORRSPEC_API csp_status csp_allan_deviation(const double *y, size_t n, double sample_period_s,
                                            csp_allan_result **out);
CORRSPEC_API void csp_allan_result_destroy(csp_allan_result *result);
CORRSPEC_API csp_status csp_allan_result_size(const csp_allan_result *result, size_t *n);
CORRSPEC_API csp_status csp_allan_result_point(const csp_allan_result *result, size_t index,
                                               double *tau_s, double *sigma_y);

/* ---- joint-state detection -------------------------------------------- */

/* Joint states are indexed 0..3 as (atom1, atom2) = dd, du, ud, uu. */
typedef struct csp_detection_model csp_detection_model;

CORRSPEC_API csp_status csp_detection_model_create_default(csp_detection_model **out);
CORRSPEC_API csp_status csp_detection_model_create_mapping(double bright_counts,
                                                           double dark_counts,
                                                           double strong_weight,
                                                           double weak_weight,
                                                           csp_detection_model **out);
/* mean_counts holds 4 values per cycle type, cycle-major. */
CORRSPEC_API csp_status csp_detection_model_create(const double *mean_counts, size_t cycle_types,
                                                   csp_detection_model **out);
CORRSPEC_API void csp_detection_model_destroy(csp_detection_model *model);
CORRSPEC_API csp_status csp_detection_model_set_stopping(csp_detection_model *model,
                                                         double cycle_duration_s, double threshold,
                                                         uint32_t max_cycles);
CORRSPEC_API csp_status csp_detection_model_cycle_types(const csp_detection_model *model,
                                                        size_t *n);
CORRSPEC_API csp_status csp_detection_model_mean_counts(const csp_detection_model *model,
                                                        size_t cycle, int state, double *out);

/* One adaptive detection on stream (seed, index). */
CORRSPEC_API csp_status csp_detect_joint_state(const csp_detection_model *model, int true_state,
                                               uint64_t seed, uint64_t index, int *declared,
                                               uint32_t *cycles_used, int *converged);

typedef struct csp_detection_summary {
  uint64_t trials;
  double mean_cycles;
  double mean_duration_s;
  double misidentification_rate;
  double convergence_rate;
} csp_detection_summary;

typedef struct csp_detection_benchmark csp_detection_benchmark;

CORRSPEC_API csp_status csp_detection_benchmark_run(const csp_detection_model *model,
                                                    uint64_t trials, uint64_t seed,
                                                    uint32_t workers,
                                                    csp_detection_benchmark **out);
CORRSPEC_API void csp_detection_benchmark_destroy(csp_detection_benchmark *bench);
CORRSPEC_API csp_status csp_detection_benchmark_summary(const csp_detection_benchmark *bench,
                                                        csp_detection_summary *out);
/* Histogram bins are cycles 0..max_cycles. */
CORRSPEC_API csp_status csp_detection_benchmark_histogram_size(const csp_detection_benchmark *bench,
                                                               size_t *n);
CORRSPEC_API csp_status csp_detection_benchmark_histogram_bin(const csp_detection_benchmark *bench,
                                                              size_t cycles, uint64_t *count);

/* ---- remote comparison ------------------------------------------------ */

typedef enum csp_laser_noise_kind {
  CSP_LASER_UNIFORM_RANDOM = 0,
  CSP_LASER_RANDOM_WALK = 1,
  CSP_LASER_FLICKER = 2
} csp_laser_noise_kind;

typedef struct csp_remote_config {
  uint64_t n_a;
  uint64_t n_b;
  double theta_a;
  double theta_b;
  double true_dphi_ab;
  double prior_dphi_ab;
  double prior_var;
  csp_laser_noise_kind noise_kind;
  double noise_magnitude_rad;
  uint32_t flicker_components;
  int synchronized;
  double t_s;
  double edge_epsilon;
  double ambiguity_sigmas;
} csp_remote_config;

CORRSPEC_API csp_remote_config csp_remote_config_default(void);
/* Sets theta_a, theta_b from prior_dphi_ab. */
CORRSPEC_API csp_status csp_calibrate_quadrature(csp_remote_config *config);
CORRSPEC_API csp_status csp_clock_transition_probability(double phi_x, double phi_l,
                                                         double theta_x, double *out);
CORRSPEC_API csp_status csp_invert_phase_difference(double p_a, double p_b, double theta_a,
                                                    double theta_b, double *out);
CORRSPEC_API csp_status csp_comparison_instability(const csp_remote_config *config, double tau,
                                                   const csp_clock_spec *spec, double *out);

typedef struct csp_remote_summary {
  uint64_t shots;
  uint64_t used;
  double mean;
  double variance;
  double std_error;
  double bias;
  double predicted_variance;
  double ambiguity_rate;
  double edge_rate;
  double excluded_rate;
} csp_remote_summary;

typedef struct csp_remote_shot {
  double phi_l_a;
  double phi_l_b;
  double p_hat_a;
  double p_hat_b;
  double estimate;
  int ambiguous;
  int edge;
} csp_remote_shot;

typedef struct csp_remote_run csp_remote_run;

CORRSPEC_API csp_status csp_remote_run_create(const csp_remote_config *config, uint64_t shots,
                                              uint64_t seed, uint32_t workers,
                                              csp_remote_run **out);
CORRSPEC_API void csp_remote_run_destroy(csp_remote_run *run);
CORRSPEC_API csp_status csp_remote_run_summary(const csp_remote_run *run, csp_remote_summary *out);
CORRSPEC_API csp_status csp_remote_run_shot(const csp_remote_run *run, uint64_t index,
                                            csp_remote_shot *out);

#ifdef __cplusplus
}
#endif

#endif /* CORRSPEC_CORRSPEC_H */
