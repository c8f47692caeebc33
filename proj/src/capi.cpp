#include "corrspec/corrspec.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <new>
#include <string>
#include <utility>

#include "corrspec/core.hpp"
#include "corrspec/detection.hpp"
#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"
#include "corrspec/protocol.hpp"
#include "corrspec/remote.hpp"

using namespace corrspec;

struct csp_fringe_dataset {
  FringeDataset value;
};
struct csp_allan_result {
  std::vector<AllanPoint> points;
};
struct csp_detection_model {
  DetectionModel value;
};
struct csp_detection_benchmark {
  DetectionBenchmark value;
};
struct csp_remote_run {
  RemoteRun value;
};

namespace {

thread_local std::string g_last_error;

csp_status record(csp_status status, const char *what) {
  g_last_error = what;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class Body> csp_status guarded(Body &&body) noexcept {
  try {
    body();
    return CSP_OK;
  } catch (const InvalidArgument &e) {
    return record(CSP_INVALID_ARGUMENT, e.what());
  } catch (const Unmeasurable &e) {
    return record(CSP_UNMEASURABLE, e.what());
  } catch (const ModelMisconfigured &e) {
    return record(CSP_MODEL_MISCONFIGURED, e.what());
  } catch (const std::bad_alloc &) {
    return record(CSP_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return record(CSP_INTERNAL, e.what());
  } catch (...) {
    return record(CSP_INTERNAL, "unknown failure");
  }
}

#define CSP_REQUIRE_PTR(p)                                                                         \
  do {                                                                                             \
    if ((p) == nullptr)                                                                            \
      return record(CSP_NULL_POINTER, "null pointer argument: " #p);                               \
  } while (0)

ClockSpec to_cpp(const csp_clock_spec &s) {
  return {s.nu_hz, s.t_prime_s, s.detection_fidelity, s.overhead_s, s.session_overhead_s};
}

// Validated conversion for entry points that evaluate formulas with a spec.
ClockSpec checked(const csp_clock_spec &s) {
  ClockSpec spec = to_cpp(s);
  validate(spec);
  return spec;
}

RemoteConfig to_cpp(const csp_remote_config &c) {
  RemoteConfig r;
  r.n_a = c.n_a;
  r.n_b = c.n_b;
  r.theta_a = c.theta_a;
  r.theta_b = c.theta_b;
  r.true_dphi_ab = c.true_dphi_ab;
  r.prior_dphi_ab = c.prior_dphi_ab;
  r.prior_var = c.prior_var;
  switch (c.noise_kind) {
  case CSP_LASER_UNIFORM_RANDOM: r.laser_noise.kind = LaserNoiseKind::uniform_random; break;
  case CSP_LASER_RANDOM_WALK: r.laser_noise.kind = LaserNoiseKind::random_walk; break;
  case CSP_LASER_FLICKER: r.laser_noise.kind = LaserNoiseKind::flicker; break;
  default: throw InvalidArgument("unknown laser noise kind");
  }
  r.laser_noise.magnitude_rad = c.noise_magnitude_rad;
  r.laser_noise.flicker_components = c.flicker_components;
  r.synchronized = c.synchronized != 0;
  r.t_s = c.t_s;
  r.edge_epsilon = c.edge_epsilon;
  r.ambiguity_sigmas = c.ambiguity_sigmas;
  return r;
}

csp_fringe_fit to_c(const FringeFit &f) {
  return {f.contrast,          f.phase0,          f.log_likelihood,
          f.contrast_ci.lower, f.contrast_ci.upper, f.phase_ci.lower,
          f.phase_ci.upper,    f.phase_identifiable ? 1 : 0, f.contrast_sigma(),
          f.phase_sigma()};
}

JointState to_state(int state) {
  if (state < 0 || state > 3)
    throw InvalidArgument("joint state index must lie in [0, 3]");
  return static_cast<JointState>(state);
}

} // namespace

extern "C" {

const char *csp_version(void) { return CORRSPEC_VERSION_STRING; }

const char *csp_last_error(void) { return g_last_error.c_str(); }

const char *csp_status_name(csp_status status) {
  switch (status) {
  case CSP_OK: return "ok";
  case CSP_INVALID_ARGUMENT: return "invalid argument";
  case CSP_UNMEASURABLE: return "unmeasurable";
  case CSP_MODEL_MISCONFIGURED: return "model misconfigured";
  case CSP_NULL_POINTER: return "null pointer";
  case CSP_OUT_OF_RANGE: return "out of range";
  case CSP_INTERNAL: return "internal error";
  }
  return "unknown status";
}

csp_clock_spec csp_clock_spec_default(void) {
  const ClockSpec s;
  return {s.nu_hz, s.t_prime_s, s.detection_fidelity, s.overhead_s, s.session_overhead_s};
}

csp_status csp_clock_spec_validate(const csp_clock_spec *spec) {
  CSP_REQUIRE_PTR(spec);
  return guarded([&] { validate(to_cpp(*spec)); });
}

csp_status csp_ramsey_transition_probability(double dphi, double *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = ramsey_transition_probability(dphi); });
}

csp_status csp_joint_correlation_probability(double dphi_1, double dphi_2, double *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = joint_correlation_probability({dphi_1, dphi_2}); });
}

csp_status csp_averaged_correlation(double delta_phi, double contrast, double *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = averaged_correlation(delta_phi, contrast); });
}

csp_status csp_lifetime_contrast(const csp_clock_spec *spec, double t, double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = lifetime_contrast(t, checked(*spec)); });
}

csp_status csp_instability(const csp_clock_spec *spec, double contrast, double t, double tau,
                           double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = instability(checked(*spec), contrast, t, tau); });
}

csp_status csp_lifetime_limited_instability(const csp_clock_spec *spec, double t, double tau,
                                            double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = lifetime_limited_instability(checked(*spec), t, tau); });
}

csp_status csp_scan_instability(const csp_clock_spec *spec, double contrast, double t, double tau,
                                double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = scan_instability(checked(*spec), contrast, t, tau); });
}

csp_status csp_optimal_probe_time(const csp_clock_spec *spec, double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = optimal_probe_time(checked(*spec)); });
}

csp_status csp_q_coherence(const csp_clock_spec *spec, double t_c, double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = q_coherence(checked(*spec), t_c); });
}

csp_status csp_q_spectroscopic(const csp_clock_spec *spec, double t, double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = q_spectroscopic(checked(*spec), t); });
}

csp_status csp_duty_cycle_factor(const csp_clock_spec *spec, double t, double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = duty_cycle_factor(t, checked(*spec)); });
}

csp_status csp_detection_contrast_factor(double fidelity_1, double fidelity_2, double *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = detection_contrast_factor(fidelity_1, fidelity_2); });
}

csp_status csp_session_duration(const csp_clock_spec *spec, double t, uint64_t n_probes,
                                double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = session_duration(t, n_probes, checked(*spec)); });
}

csp_status csp_fringe_dataset_create(double t_s, csp_fringe_dataset **out) {
  CSP_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    detail::require(std::isfinite(t_s) && t_s > 0.0, "fringe dataset t_s must be > 0");
    auto *data = new csp_fringe_dataset;
    data->value.t_s = t_s;
    *out = data;
  });
}

void csp_fringe_dataset_destroy(csp_fringe_dataset *data) { delete data; }

csp_status csp_fringe_dataset_add_point(csp_fringe_dataset *data, double delta_phi_z,
                                        uint64_t n_correlated, uint64_t n_total) {
  CSP_REQUIRE_PTR(data);
  return guarded([&] {
    FringeDataset candidate{data->value.t_s, {}};
    if (!data->value.points.empty())
      candidate.points.push_back(data->value.points.back());
    candidate.points.push_back({delta_phi_z, n_correlated, n_total});
    validate(candidate);
    data->value.points.push_back(candidate.points.back());
  });
}

csp_status csp_fringe_dataset_t(const csp_fringe_dataset *data, double *t_s) {
  CSP_REQUIRE_PTR(data);
  CSP_REQUIRE_PTR(t_s);
  *t_s = data->value.t_s;
  return CSP_OK;
}

csp_status csp_fringe_dataset_size(const csp_fringe_dataset *data, size_t *n) {
  CSP_REQUIRE_PTR(data);
  CSP_REQUIRE_PTR(n);
  *n = data->value.points.size();
  return CSP_OK;
}

csp_status csp_fringe_dataset_point(const csp_fringe_dataset *data, size_t index,
                                    double *delta_phi_z, uint64_t *n_correlated,
                                    uint64_t *n_total) {
  CSP_REQUIRE_PTR(data);
  if (index >= data->value.points.size())
    return record(CSP_OUT_OF_RANGE, "fringe point index out of range");
  const auto &p = data->value.points[index];
  if (delta_phi_z)
    *delta_phi_z = p.delta_phi_z;
  if (n_correlated)
    *n_correlated = p.n_correlated;
  if (n_total)
    *n_total = p.n_total;
  return CSP_OK;
}

csp_sim_options csp_sim_options_default(void) { return {0.0, 0.0, 0, 1}; }

csp_status csp_phase_grid(size_t n, double start, double step, double *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] {
    const auto grid = phase_grid(n, start, step);
    std::copy(grid.begin(), grid.end(), out);
  });
}

csp_status csp_allocate_probes(uint64_t total, size_t points, uint64_t *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] {
    const auto probes = allocate_probes(total, points);
    std::copy(probes.begin(), probes.end(), out);
  });
}

csp_status csp_simulate_fringe(const csp_clock_spec *spec, double t, const double *grid,
                               const uint64_t *probes, size_t n, uint64_t seed,
                               const csp_sim_options *options, csp_fringe_dataset **out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(grid);
  CSP_REQUIRE_PTR(probes);
  CSP_REQUIRE_PTR(out);
  *out = nullptr;
  const csp_sim_options opts = options ? *options : csp_sim_options_default();
  return guarded([&] {
    FringeOptions fo;
    fo.y_offsets = {opts.y_offset_1, opts.y_offset_2};
    fo.dataset_id = opts.dataset_id;
    fo.workers = opts.workers;
    auto data = simulate_fringe(t, std::span<const double>(grid, n),
                                std::span<const std::uint64_t>(probes, n), to_cpp(*spec), seed, fo);
    *out = new csp_fringe_dataset{std::move(data)};
  });
}

csp_status csp_fit_fringe(const csp_fringe_dataset *data, csp_fringe_fit *out) {
  CSP_REQUIRE_PTR(data);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = to_c(fit_fringe_mle(data->value)); });
}

csp_status csp_fit_contrast_decay(const csp_decay_point *points, size_t n, double prior_lower,
                                  double prior_upper, csp_coherence_fit *out) {
  CSP_REQUIRE_PTR(points);
  CSP_REQUIRE_PTR(out);
  return guarded([&] {
    std::vector<DecayPoint> pts;
    for (size_t i = 0; i < n; ++i)
      pts.push_back({points[i].t_s, points[i].contrast, points[i].sigma});
    const auto fit = fit_contrast_decay(pts, {prior_lower, prior_upper});
    *out = {fit.t_c, fit.ci_lower, fit.ci_upper, fit.prior_bounds.lower, fit.prior_bounds.upper,
            fit.c0};
  });
}

csp_status csp_fit_phase_drift(const csp_phase_point *points, size_t n, const csp_clock_spec *spec,
                               csp_drift_fit *out) {
  CSP_REQUIRE_PTR(points);
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] {
    std::vector<PhasePoint> pts;
    for (size_t i = 0; i < n; ++i)
      pts.push_back({points[i].t_s, points[i].phase, points[i].sigma});
    const auto fit = fit_phase_drift(pts, checked(*spec));
    *out = {fit.slope,           fit.slope_err,           fit.intercept, fit.intercept_err,
            fit.fractional_shift, fit.fractional_shift_err};
  });
}

csp_status csp_unwrap_phases(const double *phases, size_t n, double *out) {
  CSP_REQUIRE_PTR(phases);
  CSP_REQUIRE_PTR(out);
  return guarded([&] {
    const auto unwrapped = unwrap_phases(std::span<const double>(phases, n));
    std::copy(unwrapped.begin(), unwrapped.end(), out);
  });
}

csp_status csp_extrapolate_sigma1s(double sigma, double duration_s, double *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = extrapolate_sigma1s(sigma, duration_s); });
}

csp_status csp_fractional_uncertainty_from_phase(double phase_sigma, double t,
                                                 const csp_clock_spec *spec, double *out) {
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded(
      [&] { *out = fractional_uncertainty_from_phase(phase_sigma, t, checked(*spec)); });
}

csp_status csp_allan_deviation(const double *y, size_t n, double sample_period_s,
                               csp_allan_result **out) {
  CSP_REQUIRE_PTR(y);
  CSP_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    auto points = allan_deviation(std::span<const double>(y, n), sample_period_s);
    *out = new csp_allan_result{std::move(points)};
  });
}

void csp_allan_result_destroy(csp_allan_result *result) { delete result; }

csp_status csp_allan_result_size(const csp_allan_result *result, size_t *n) {
  CSP_REQUIRE_PTR(result);
  CSP_REQUIRE_PTR(n);
  *n = result->points.size();
  return CSP_OK;
}

csp_status csp_allan_result_point(const csp_allan_result *result, size_t index, double *tau_s,
                                  double *sigma_y) {
  CSP_REQUIRE_PTR(result);
  if (index >= result->points.size())
    return record(CSP_OUT_OF_RANGE, "Allan point index out of range");
  if (tau_s)
    *tau_s = result->points[index].tau_s;
  if (sigma_y)
    *sigma_y = result->points[index].sigma_y;
  return CSP_OK;
}

csp_status csp_detection_model_create_default(csp_detection_model **out) {
  CSP_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] { *out = new csp_detection_model{DetectionModel::calibrated_default()}; });
}

csp_status csp_detection_model_create_mapping(double bright_counts, double dark_counts,
                                              double strong_weight, double weak_weight,
                                              csp_detection_model **out) {
  CSP_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    auto model = DetectionModel::from_mapping({bright_counts, dark_counts, strong_weight, weak_weight});
    validate(model);
    *out = new csp_detection_model{std::move(model)};
  });
}

csp_status csp_detection_model_create(const double *mean_counts, size_t cycle_types,
                                      csp_detection_model **out) {
  CSP_REQUIRE_PTR(mean_counts);
  CSP_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    DetectionModel model;
    for (size_t c = 0; c < cycle_types; ++c) {
      std::array<double, kJointStates> row{};
      for (size_t s = 0; s < kJointStates; ++s)
        row[s] = mean_counts[c * kJointStates + s];
      model.mean_counts.push_back(row);
    }
    validate(model);
    *out = new csp_detection_model{std::move(model)};
  });
}

void csp_detection_model_destroy(csp_detection_model *model) { delete model; }

csp_status csp_detection_model_set_stopping(csp_detection_model *model, double cycle_duration_s,
                                            double threshold, uint32_t max_cycles) {
  CSP_REQUIRE_PTR(model);
  return guarded([&] {
    DetectionModel updated = model->value;
    updated.cycle_duration_s = cycle_duration_s;
    updated.threshold = threshold;
    updated.max_cycles = max_cycles;
    validate(updated);
    model->value = std::move(updated);
  });
}

csp_status csp_detection_model_cycle_types(const csp_detection_model *model, size_t *n) {
  CSP_REQUIRE_PTR(model);
  CSP_REQUIRE_PTR(n);
  *n = model->value.cycle_types();
  return CSP_OK;
}

csp_status csp_detection_model_mean_counts(const csp_detection_model *model, size_t cycle,
                                           int state, double *out) {
  CSP_REQUIRE_PTR(model);
  CSP_REQUIRE_PTR(out);
  if (cycle >= model->value.cycle_types() || state < 0 || state > 3)
    return record(CSP_OUT_OF_RANGE, "cycle or state index out of range");
  *out = model->value.mean_counts[cycle][static_cast<size_t>(state)];
  return CSP_OK;
}

csp_status csp_detect_joint_state(const csp_detection_model *model, int true_state, uint64_t seed,
                                  uint64_t index, int *declared, uint32_t *cycles_used,
                                  int *converged) {
  CSP_REQUIRE_PTR(model);
  return guarded([&] {
    Stream rng(seed, stream_tag(StreamModule::detection, 1), index);
    const auto r = detect_joint_state(to_state(true_state), model->value, rng);
    if (declared)
      *declared = static_cast<int>(r.declared);
    if (cycles_used)
      *cycles_used = r.cycles_used;
    if (converged)
      *converged = r.converged ? 1 : 0;
  });
}

csp_status csp_detection_benchmark_run(const csp_detection_model *model, uint64_t trials,
                                       uint64_t seed, uint32_t workers,
                                       csp_detection_benchmark **out) {
  CSP_REQUIRE_PTR(model);
  CSP_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    auto bench = run_detection_benchmark(model->value, trials, seed, workers);
    *out = new csp_detection_benchmark{std::move(bench)};
  });
}

void csp_detection_benchmark_destroy(csp_detection_benchmark *bench) { delete bench; }

csp_status csp_detection_benchmark_summary(const csp_detection_benchmark *bench,
                                           csp_detection_summary *out) {
  CSP_REQUIRE_PTR(bench);
  CSP_REQUIRE_PTR(out);
  const auto &b = bench->value;
  *out = {b.trials, b.mean_cycles, b.mean_duration_s, b.misidentification_rate,
          b.convergence_rate};
  return CSP_OK;
}

csp_status csp_detection_benchmark_histogram_size(const csp_detection_benchmark *bench,
                                                  size_t *n) {
  CSP_REQUIRE_PTR(bench);
  CSP_REQUIRE_PTR(n);
  *n = bench->value.histogram.size();
  return CSP_OK;
}

csp_status csp_detection_benchmark_histogram_bin(const csp_detection_benchmark *bench,
                                                 size_t cycles, uint64_t *count) {
  CSP_REQUIRE_PTR(bench);
  CSP_REQUIRE_PTR(count);
  if (cycles >= bench->value.histogram.size())
    return record(CSP_OUT_OF_RANGE, "histogram bin out of range");
  *count = bench->value.histogram[cycles];
  return CSP_OK;
}

csp_remote_config csp_remote_config_default(void) {
  const RemoteConfig r;
  return {r.n_a,
          r.n_b,
          r.theta_a,
          r.theta_b,
          r.true_dphi_ab,
          r.prior_dphi_ab,
          r.prior_var,
          CSP_LASER_UNIFORM_RANDOM,
          r.laser_noise.magnitude_rad,
          r.laser_noise.flicker_components,
          r.synchronized ? 1 : 0,
          r.t_s,
          r.edge_epsilon,
          r.ambiguity_sigmas};
}

csp_status csp_calibrate_quadrature(csp_remote_config *config) {
  CSP_REQUIRE_PTR(config);
  return guarded([&] {
    const auto [a, b] = calibrate_quadrature(config->prior_dphi_ab);
    config->theta_a = a;
    config->theta_b = b;
  });
}

csp_status csp_clock_transition_probability(double phi_x, double phi_l, double theta_x,
                                            double *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = clock_transition_probability(phi_x, phi_l, theta_x); });
}

csp_status csp_invert_phase_difference(double p_a, double p_b, double theta_a, double theta_b,
                                       double *out) {
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = invert_phase_difference(p_a, p_b, theta_a, theta_b); });
}

csp_status csp_comparison_instability(const csp_remote_config *config, double tau,
                                      const csp_clock_spec *spec, double *out) {
  CSP_REQUIRE_PTR(config);
  CSP_REQUIRE_PTR(spec);
  CSP_REQUIRE_PTR(out);
  return guarded([&] { *out = comparison_instability(to_cpp(*config), tau, checked(*spec)); });
}

csp_status csp_remote_run_create(const csp_remote_config *config, uint64_t shots, uint64_t seed,
                                 uint32_t workers, csp_remote_run **out) {
  CSP_REQUIRE_PTR(config);
  CSP_REQUIRE_PTR(out);
  *out = nullptr;
  return guarded([&] {
    auto run = run_remote_comparison(to_cpp(*config), shots, seed, workers);
    *out = new csp_remote_run{std::move(run)};
  });
}

void csp_remote_run_destroy(csp_remote_run *run) { delete run; }

csp_status csp_remote_run_summary(const csp_remote_run *run, csp_remote_summary *out) {
  CSP_REQUIRE_PTR(run);
  CSP_REQUIRE_PTR(out);
  const auto &s = run->value.summary;
  *out = {s.shots,     s.used, s.mean,          s.variance,  s.std_error,
          s.bias,      s.predicted_variance, s.ambiguity_rate, s.edge_rate, s.excluded_rate};
  return CSP_OK;
}

csp_status csp_remote_run_shot(const csp_remote_run *run, uint64_t index, csp_remote_shot *out) {
  CSP_REQUIRE_PTR(run);
  CSP_REQUIRE_PTR(out);
  if (index >= run->value.shots.size())
    return record(CSP_OUT_OF_RANGE, "shot index out of range");
  const auto &s = run->value.shots[index];
  *out = {s.phi_l_a, s.phi_l_b, s.p_hat_a, s.p_hat_b, s.estimate, s.ambiguous ? 1 : 0,
          s.edge ? 1 : 0};
  return CSP_OK;
}

} // extern "C"
