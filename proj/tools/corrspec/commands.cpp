#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "output.hpp"
#include "scenario.hpp"
#include "support.hpp"

namespace cli {

namespace {

using nlohmann::json;

struct Run {
  Scenario scenario;
  std::uint64_t seed = 0;
  json canonical;
  std::string started;
};

template <class Override> Run prepare(const CommandOptions &o, Override &&override_probes) {
  Run run;
  run.started = utc_now();
  if (!o.config.empty())
    run.scenario = load_scenario(o.config);
  if (o.seed)
    run.scenario.seed = o.seed;
  if (!run.scenario.seed)
    throw ConfigError("seed is required: set 'seed' in the config or pass --seed");
  if (o.probes) {
    if (*o.probes == 0)
      throw ConfigError("--probes must be > 0");
    override_probes(run.scenario, *o.probes);
  }
  validate(run.scenario);
  run.seed = *run.scenario.seed;
  run.canonical = to_json(run.scenario);
  return run;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double call(csp_status (*f)(const csp_clock_spec *, double, double *), const csp_clock_spec &spec,
            double x, const char *what) {
  double out = 0.0;
  check(f(&spec, x, &out), what);
  return out;
}

std::vector<double> phase_grid(const ProtocolSection &p) {
  std::vector<double> grid(p.phase_points);
  check(csp_phase_grid(grid.size(), p.phase_start_rad, p.phase_step_rad, grid.data()),
        "protocol phase grid");
  return grid;
}

struct FringeRow {
  double delta_phi_z;
  std::uint64_t n_correlated, n_total;
};

struct FringeBlock {
  double t_s;
  std::vector<FringeRow> rows;
};

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  return out;
}

std::vector<FringeBlock> read_fringe_csv(const std::filesystem::path &path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<FringeBlock> blocks;
  bool header = false;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.empty() || line[0] == '#')
      continue;
    const auto cells = split(line);
    const auto where = path.string() + ":" + std::to_string(number);
    if (!header) {
      if (cells != std::vector<std::string>{"t_s", "delta_phi_z_rad", "n_correlated", "n_total"})
        throw IoError(where + ": expected header t_s,delta_phi_z_rad,n_correlated,n_total");
      header = true;
      continue;
    }
    if (cells.size() != 4)
      throw IoError(where + ": expected 4 columns");
    double t = 0.0, phi = 0.0;
    std::uint64_t k = 0, n = 0;
    try {
      std::size_t used = 0;
      t = std::stod(cells[0], &used);
      phi = std::stod(cells[1]);
      k = std::stoull(cells[2]);
      n = std::stoull(cells[3]);
    } catch (const std::exception &) {
      throw IoError(where + ": malformed number");
    }
    if (blocks.empty() || blocks.back().t_s != t)
      blocks.push_back({t, {}});
    blocks.back().rows.push_back({phi, k, n});
  }
  if (!header)
    throw IoError(path.string() + ": missing header row");
  if (blocks.empty())
    throw IoError(path.string() + ": no fringe data");
  return blocks;
}

json fit_json(double t, std::uint64_t total, const csp_fringe_fit &f) {
  return {{"t_s", t},
          {"n_total", total},
          {"contrast", f.contrast},
          {"contrast_ci", {f.contrast_lower, f.contrast_upper}},
          {"contrast_sigma", f.contrast_sigma},
          {"phase0_rad", f.phase0},
          {"phase_ci_rad", {f.phase_lower, f.phase_upper}},
          {"phase_sigma_rad", number_or_null(f.phase_sigma)},
          {"phase_identifiable", f.phase_identifiable != 0},
          {"log_likelihood", f.log_likelihood}};
}

} // namespace

int simulate_fringe(const CommandOptions &o) {
  Run run = prepare(o, [](Scenario &s, std::uint64_t n) {
    for (auto &count : s.protocol.probe_counts)
      count = n;
  });
  const auto &spec = run.scenario.clock;
  const auto &p = run.scenario.protocol;
  const auto grid = phase_grid(p);

  CsvTable table("corrspec.fringe/1", {"t_s", "delta_phi_z_rad", "n_correlated", "n_total"});
  json datasets = json::array();
  for (std::size_t i = 0; i < p.ramsey_times_s.size(); ++i) {
    const double t = p.ramsey_times_s[i];
    std::vector<std::uint64_t> probes(grid.size());
    check(csp_allocate_probes(p.probe_counts[i], grid.size(), probes.data()),
          "protocol.probe_counts");
    csp_sim_options options = csp_sim_options_default();
    options.y_offset_1 = p.y_offset_1;
    options.y_offset_2 = p.y_offset_2;
    options.dataset_id = static_cast<std::uint32_t>(i);
    options.workers = o.workers;
    Dataset data;
    check(csp_simulate_fringe(&spec, t, grid.data(), probes.data(), grid.size(), run.seed, &options,
                              data.out()),
          "simulate-fringe");
    std::uint64_t correlated = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      double phi = 0.0;
      std::uint64_t k = 0, n = 0;
      check(csp_fringe_dataset_point(data.get(), j, &phi, &k, &n), "simulate-fringe");
      table.row().add(t).add(phi).add(k).add(n);
      correlated += k;
    }
    double deff = 0.0;
    check(csp_detection_contrast_factor(spec.detection_fidelity, spec.detection_fidelity, &deff),
          "clock.detection_fidelity");
    datasets.push_back(
        {{"t_s", t},
         {"probes", p.probe_counts[i]},
         {"points", grid.size()},
         {"correlated_fraction",
          static_cast<double>(correlated) / static_cast<double>(p.probe_counts[i])},
         {"expected_contrast", call(csp_lifetime_contrast, spec, t, "clock") * deff}});
  }

  RunOutput out(o.out, "simulate-fringe");
  out.write_csv("fringe.csv", table);
  out.write_json("fringe_summary.json",
                 {{"command", "simulate-fringe"}, {"seed", run.seed}, {"datasets", datasets}});
  out.finish(run.canonical, run.seed, o.timestamps, run.started);
  return kSuccess;
}

int fit(const CommandOptions &o) {
  Run run = prepare(o, [](Scenario &, std::uint64_t) {});
  const auto input =
      o.input.empty() ? std::filesystem::path(o.out) / "fringe.csv" : std::filesystem::path(o.input);
  const auto blocks = read_fringe_csv(input);

  CsvTable table("corrspec.fits/1",
                 {"t_s", "n_total", "contrast", "contrast_lower", "contrast_upper", "phase0_rad",
                  "phase_lower_rad", "phase_upper_rad", "phase_identifiable", "log_likelihood"});
  json fits = json::array();
  std::vector<csp_phase_point> phases;
  std::vector<double> unidentifiable;
  for (const auto &block : blocks) {
    Dataset data;
    std::uint64_t total = 0;
    if (csp_fringe_dataset_create(block.t_s, data.out()) != CSP_OK)
      throw IoError(input.string() + ": " + csp_last_error());
    for (const auto &r : block.rows) {
      if (csp_fringe_dataset_add_point(data.get(), r.delta_phi_z, r.n_correlated, r.n_total) !=
          CSP_OK)
        throw IoError(input.string() + ": " + csp_last_error());
      total += r.n_total;
    }
    csp_fringe_fit f{};
    const csp_status status = csp_fit_fringe(data.get(), &f);
    if (status == CSP_INVALID_ARGUMENT)
      throw StatisticalError("fringe at t_s = " + std::to_string(block.t_s) + ": " +
                             csp_last_error());
    check(status, "fit");
    table.row()
        .add(block.t_s)
        .add(total)
        .add(f.contrast)
        .add(f.contrast_lower)
        .add(f.contrast_upper)
        .add(f.phase0)
        .add(f.phase_lower)
        .add(f.phase_upper)
        .add(f.phase_identifiable)
        .add(f.log_likelihood);
    fits.push_back(fit_json(block.t_s, total, f));
    if (f.phase_identifiable)
      phases.push_back({block.t_s, f.phase0, f.phase_sigma});
    else
      unidentifiable.push_back(block.t_s);
  }

  json drift = nullptr;
  if (phases.size() >= 2) {
    std::vector<double> raw, unwrapped(phases.size());
    for (const auto &p : phases)
      raw.push_back(p.phase);
    check(csp_unwrap_phases(raw.data(), raw.size(), unwrapped.data()), "fit");
    for (std::size_t i = 0; i < phases.size(); ++i)
      phases[i].phase = unwrapped[i];
    csp_drift_fit d{};
    const csp_status status =
        csp_fit_phase_drift(phases.data(), phases.size(), &run.scenario.clock, &d);
    if (status == CSP_OK) {
      json points = json::array();
      for (const auto &p : phases)
        points.push_back({{"t_s", p.t_s}, {"phase_rad", p.phase}, {"sigma_rad", p.sigma}});
      drift = {{"slope_rad_per_s", d.slope},
               {"slope_err_rad_per_s", d.slope_err},
               {"intercept_rad", d.intercept},
               {"intercept_err_rad", d.intercept_err},
               {"fractional_shift", d.fractional_shift},
               {"fractional_shift_err", d.fractional_shift_err},
               {"scenario_fractional_offset",
                run.scenario.protocol.y_offset_2 - run.scenario.protocol.y_offset_1},
               {"points", points}};
    }
  }

  RunOutput out(o.out, "fit");
  out.write_csv("fits.csv", table);
  out.write_json("fits.json", {{"command", "fit"},
                               {"input", input.filename().string()},
                               {"datasets", fits},
                               {"phase_unidentifiable_t_s", unidentifiable},
                               {"drift", drift}});
  out.finish(run.canonical, run.seed, o.timestamps, run.started);
  if (drift.is_null()) {
    std::cerr << "corrspec: fewer than two fringes with an identifiable phase; no drift fit\n";
    return kNotIdentifiable;
  }
  return kSuccess;
}

int coherence(const CommandOptions &o) {
  Run run = prepare(o, [](Scenario &, std::uint64_t) {});
  const auto &spec = run.scenario.clock;
  const auto input =
      o.input.empty() ? std::filesystem::path(o.out) / "fits.json" : std::filesystem::path(o.input);
  json fits;
  try {
    fits = json::parse(read_file(input));
  } catch (const json::parse_error &e) {
    throw IoError(input.string() + ": " + e.what());
  }
  std::vector<csp_decay_point> points;
  try {
    for (const auto &d : fits.at("datasets"))
      points.push_back({d.at("t_s").get<double>(), d.at("contrast").get<double>(),
                        d.at("contrast_sigma").get<double>()});
  } catch (const json::exception &e) {
    throw IoError(input.string() + ": " + e.what());
  }

  const auto &e = run.scenario.estimation;
  csp_coherence_fit f{};
  const csp_status status = csp_fit_contrast_decay(
      points.data(), points.size(), e.coherence_prior_lower_s, e.coherence_prior_upper_s, &f);
  if (status == CSP_INVALID_ARGUMENT)
    throw StatisticalError(std::string("contrast decay: ") + csp_last_error());
  check(status, "coherence");

  CsvTable table("corrspec.decay/1", {"t_s", "contrast", "sigma", "model_contrast"});
  json q_spec = json::array();
  for (const auto &p : points) {
    table.row().add(p.t_s).add(p.contrast).add(p.sigma).add(f.c0 * std::exp(-p.t_s / f.t_c));
    if (p.t_s > 0.0)
      q_spec.push_back(
          {{"t_s", p.t_s}, {"q", call(csp_q_spectroscopic, spec, p.t_s, "q_spectroscopic")}});
  }
  const json result{
      {"command", "coherence"},
      {"input", input.filename().string()},
      {"t_c_s", f.t_c},
      {"ci_68_s", {f.ci_lower, f.ci_upper}},
      {"prior_s", {f.prior_lower, f.prior_upper}},
      {"c0", f.c0},
      {"q_coherence", call(csp_q_coherence, spec, f.t_c, "q_coherence")},
      {"q_coherence_ci",
       {f.ci_lower > 0.0 ? json(call(csp_q_coherence, spec, f.ci_lower, "q")) : json(0.0),
        call(csp_q_coherence, spec, f.ci_upper, "q")}},
      {"q_spectroscopic", q_spec},
      {"ci_contains_t_prime", f.ci_lower <= spec.t_prime_s && spec.t_prime_s <= f.ci_upper}};

  RunOutput out(o.out, "coherence");
  out.write_json("coherence.json", result);
  out.write_csv("decay.csv", table);
  out.finish(run.canonical, run.seed, o.timestamps, run.started);
  return kSuccess;
}

int instability(const CommandOptions &o) {
  Run run = prepare(o, [](Scenario &s, std::uint64_t n) { s.instability.session_probes = n; });
  const auto &spec = run.scenario.clock;
  const auto &in = run.scenario.instability;

  CsvTable table("corrspec.instability/1", {"t_s", "contrast", "duty_cycle", "sigma_lifetime",
                                            "sigma_scan_with_overhead"});
  json curve = json::array();
  const double ratio = std::log(in.t_max_s / in.t_min_s) / static_cast<double>(in.points - 1);
  for (std::uint64_t k = 0; k < in.points; ++k) {
    const double t = in.t_min_s * std::exp(ratio * static_cast<double>(k));
    const double c = call(csp_lifetime_contrast, spec, t, "clock");
    const double duty = call(csp_duty_cycle_factor, spec, t, "clock");
    double solid = 0.0, dashed = 0.0;
    check(csp_instability(&spec, c, t, in.tau_s, &solid), "instability");
    check(csp_scan_instability(&spec, c, t, in.tau_s, &dashed), "instability");
    table.row().add(t).add(c).add(duty).add(solid).add(dashed);
  }

  double optimum = 0.0;
  check(csp_optimal_probe_time(&spec, &optimum), "clock");
  const double report_t = in.report_t_s.value_or(optimum);
  double report_solid = 0.0, report_dashed = 0.0;
  const double report_c = call(csp_lifetime_contrast, spec, report_t, "clock");
  check(csp_instability(&spec, report_c, report_t, 1.0, &report_solid), "instability");
  check(csp_scan_instability(&spec, report_c, report_t, 1.0, &report_dashed), "instability");

  // Simulated session: one fringe scan at session_t_s, phase uncertainty
  // converted to a fractional frequency and extrapolated to 1 s.
  csp_clock_spec session_spec = spec;
  if (in.session_contrast)
    session_spec.t_prime_s = -in.session_t_s / std::log(2.0 * *in.session_contrast);
  const auto grid = phase_grid(run.scenario.protocol);
  std::vector<std::uint64_t> probes(grid.size());
  check(csp_allocate_probes(in.session_probes, grid.size(), probes.data()),
        "instability.session_probes");
  csp_sim_options options = csp_sim_options_default();
  options.workers = o.workers;
  Dataset data;
  check(csp_simulate_fringe(&session_spec, in.session_t_s, grid.data(), probes.data(), grid.size(),
                            run.seed, &options, data.out()),
        "instability session");
  csp_fringe_fit f{};
  check(csp_fit_fringe(data.get(), &f), "instability session");
  double duration = 0.0;
  check(csp_session_duration(&spec, in.session_t_s, in.session_probes, &duration), "clock");
  json session{{"t_s", in.session_t_s},
               {"probes", in.session_probes},
               {"duration_s", duration},
               {"fitted_contrast", f.contrast},
               {"phase_identifiable", f.phase_identifiable != 0}};
  if (f.phase_identifiable) {
    double sigma = 0.0, sigma1s = 0.0;
    check(csp_fractional_uncertainty_from_phase(f.phase_sigma, in.session_t_s, &spec, &sigma),
          "instability session");
    check(csp_extrapolate_sigma1s(sigma, duration, &sigma1s), "instability session");
    session["phase_sigma_rad"] = f.phase_sigma;
    session["sigma_at_duration"] = sigma;
    session["sigma_1s"] = sigma1s;
  }

  const json result{{"command", "instability"},
                    {"tau_s", in.tau_s},
                    {"optimal_t_s", optimum},
                    {"report",
                     {{"t_s", report_t},
                      {"contrast", report_c},
                      {"sigma_1s_lifetime", report_solid},
                      {"sigma_1s_scan_with_overhead", report_dashed}}},
                    {"session", session}};
  RunOutput out(o.out, "instability");
  out.write_csv("instability.csv", table);
  out.write_json("instability.json", result);
  out.finish(run.canonical, run.seed, o.timestamps, run.started);
  if (!f.phase_identifiable) {
    std::cerr << "corrspec: session fringe phase is not identifiable\n";
    return kNotIdentifiable;
  }
  return kSuccess;
}

int remote(const CommandOptions &o) {
  Run run = prepare(o, [](Scenario &s, std::uint64_t n) { s.remote.shots = n; });
  const auto &spec = run.scenario.clock;
  const auto &r = run.scenario.remote;
  const csp_remote_config config = remote_config(run.scenario);

  RemoteRun handle;
  check(csp_remote_run_create(&config, r.shots, run.seed, o.workers, handle.out()), "remote");
  csp_remote_summary s{};
  check(csp_remote_run_summary(handle.get(), &s), "remote");

  const double scale = 2.0 * std::numbers::pi * spec.nu_hz * r.t_s;
  CsvTable shots("corrspec.remote-shots/1", {"shot", "phi_l_a_rad", "phi_l_b_rad", "p_hat_a",
                                             "p_hat_b", "estimate_rad", "ambiguous", "edge"});
  std::vector<double> y;
  for (std::uint64_t k = 0; k < r.shots; ++k) {
    csp_remote_shot shot{};
    check(csp_remote_run_shot(handle.get(), k, &shot), "remote");
    shots.row()
        .add(k)
        .add(shot.phi_l_a)
        .add(shot.phi_l_b)
        .add(shot.p_hat_a)
        .add(shot.p_hat_b)
        .add(shot.estimate)
        .add(shot.ambiguous)
        .add(shot.edge);
    if (!shot.ambiguous && !shot.edge)
      y.push_back((shot.estimate - r.true_dphi_ab_rad) / scale);
  }

  CsvTable allan("corrspec.remote-allan/1", {"tau_s", "sigma_y"});
  if (y.size() >= 3) {
    AllanResult adev;
    check(csp_allan_deviation(y.data(), y.size(), r.t_s, adev.out()), "remote");
    std::size_t n = 0;
    check(csp_allan_result_size(adev.get(), &n), "remote");
    for (std::size_t i = 0; i < n; ++i) {
      double tau = 0.0, sigma = 0.0;
      check(csp_allan_result_point(adev.get(), i, &tau, &sigma), "remote");
      allan.row().add(tau).add(sigma);
    }
  }

  double predicted = 0.0;
  check(csp_comparison_instability(&config, r.tau_s, &spec, &predicted), "remote");
  const json result{
      {"command", "remote"},
      {"theta_a_rad", config.theta_a},
      {"theta_b_rad", config.theta_b},
      {"shots", s.shots},
      {"used", s.used},
      {"mean_rad", s.mean},
      {"variance_rad2", s.variance},
      {"std_error_rad", s.std_error},
      {"bias_rad", s.bias},
      {"predicted_variance_rad2", s.predicted_variance},
      {"variance_ratio", s.variance / s.predicted_variance},
      {"ambiguity_rate", s.ambiguity_rate},
      {"edge_rate", s.edge_rate},
      {"excluded_rate", s.excluded_rate},
      {"tau_s", r.tau_s},
      {"sigma_y_predicted", predicted},
      {"sigma_y_empirical", std::sqrt(s.variance) / (scale * std::sqrt(r.tau_s / r.t_s))}};

  RunOutput out(o.out, "remote");
  out.write_json("remote.json", result);
  out.write_csv("remote_shots.csv", shots);
  out.write_csv("remote_allan.csv", allan);
  out.finish(run.canonical, run.seed, o.timestamps, run.started);
  return kSuccess;
}

int detect_bench(const CommandOptions &o) {
  Run run = prepare(o, [](Scenario &s, std::uint64_t n) { s.detection.trials = n; });
  const auto &d = run.scenario.detection;
  DetectionModel model;
  check(csp_detection_model_create_mapping(d.bright_counts, d.dark_counts, d.strong_weight,
                                           d.weak_weight, model.out()),
        "detection");
  check(csp_detection_model_set_stopping(model.get(), d.cycle_duration_s, d.threshold,
                                         static_cast<std::uint32_t>(d.max_cycles)),
        "detection");
  DetectionBenchmark bench;
  check(csp_detection_benchmark_run(model.get(), d.trials, run.seed, o.workers, bench.out()),
        "detect-bench");
  csp_detection_summary s{};
  check(csp_detection_benchmark_summary(bench.get(), &s), "detect-bench");

  std::size_t bins = 0;
  check(csp_detection_benchmark_histogram_size(bench.get(), &bins), "detect-bench");
  CsvTable hist("corrspec.detect-histogram/1", {"cycles", "trials"});
  for (std::size_t k = 0; k < bins; ++k) {
    std::uint64_t count = 0;
    check(csp_detection_benchmark_histogram_bin(bench.get(), k, &count), "detect-bench");
    hist.row().add(static_cast<std::uint64_t>(k)).add(count);
  }

  json means = json::array();
  std::size_t cycles = 0;
  check(csp_detection_model_cycle_types(model.get(), &cycles), "detection");
  for (std::size_t c = 0; c < cycles; ++c) {
    json row = json::array();
    for (int state = 0; state < 4; ++state) {
      double m = 0.0;
      check(csp_detection_model_mean_counts(model.get(), c, state, &m), "detection");
      row.push_back(m);
    }
    means.push_back(row);
  }

  const json result{{"command", "detect-bench"},
                    {"trials", s.trials},
                    {"mean_cycles", s.mean_cycles},
                    {"mean_duration_s", s.mean_duration_s},
                    {"misidentification_rate", s.misidentification_rate},
                    {"convergence_rate", s.convergence_rate},
                    {"threshold", d.threshold},
                    {"mean_counts", means}};
  RunOutput out(o.out, "detect-bench");
  out.write_json("detect.json", result);
  out.write_csv("detect_histogram.csv", hist);
  out.finish(run.canonical, run.seed, o.timestamps, run.started);
  return kSuccess;
}

} // namespace cli
