#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corrspec/corrspec.h"
#include "json.hpp"

namespace cli {

struct ProtocolSection {
  std::vector<double> ramsey_times_s{0.1, 0.5, 1.0, 2.0, 3.0, 5.0};
  std::vector<std::uint64_t> probe_counts{1500, 600, 600, 360, 300, 100};
  std::uint64_t phase_points = 24;
  double phase_start_rad = 0.0;
  double phase_step_rad = 0.3141592653589793; // 2 pi / 20
  double y_offset_1 = 0.0;
  double y_offset_2 = 0.0;
};

struct EstimationSection {
  double coherence_prior_lower_s = 0.0;
  double coherence_prior_upper_s = 25.0;
};

struct InstabilitySection {
  double t_min_s = 0.05;
  double t_max_s = 30.0;
  std::uint64_t points = 300;
  double tau_s = 1.0;
  std::optional<double> report_t_s; // defaults to the optimal probe time
  double session_t_s = 3.0;
  std::uint64_t session_probes = 300;
  std::optional<double> session_contrast; // before the readout penalty
};

struct DetectionSection {
  double bright_counts = 2.0;
  double dark_counts = 0.5;
  double strong_weight = 0.8;
  double weak_weight = 0.3;
  double cycle_duration_s = 1.67e-3;
  double threshold = 0.99;
  std::uint64_t max_cycles = 200;
  std::uint64_t trials = 10000;
};

struct RemoteSection {
  std::uint64_t n_a = 100;
  std::uint64_t n_b = 100;
  double true_dphi_ab_rad = 0.0;
  double prior_dphi_ab_rad = 0.0;
  double prior_var_rad2 = 0.01;
  bool calibrate = true;
  double theta_a_rad = 0.0;
  double theta_b_rad = 0.0;
  std::string laser_noise = "uniform-random";
  double noise_magnitude_rad = 0.0;
  std::uint64_t flicker_components = 8;
  bool synchronized = true;
  double t_s = 3.0;
  double edge_epsilon = 0.05;
  double ambiguity_sigmas = 3.0;
  std::uint64_t shots = 10000;
  double tau_s = 1.0;
};

struct Scenario {
  std::optional<std::uint64_t> seed;
  csp_clock_spec clock = csp_clock_spec_default();
  ProtocolSection protocol;
  EstimationSection estimation;
  InstabilitySection instability;
  DetectionSection detection;
  RemoteSection remote;
};

/// Parse a YAML scenario; unknown keys and malformed values raise ConfigError
/// naming the offending key.
Scenario load_scenario(const std::string &path);

/// Cross-field checks that the library cannot see.
void validate(const Scenario &scenario);

/// Canonical form used for hashing: keys sorted, every field present.
nlohmann::json to_json(const Scenario &scenario);

csp_remote_config remote_config(const Scenario &scenario);

} // namespace cli
