#pragma once

// Synchronised Ramsey comparison of two many-atom clocks sharing one laser.
// Each shot yields a projection-noise-limited estimate of the clock phase
// difference; the common laser phase cancels when the interrogations are
// synchronised.

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "corrspec/core.hpp"
#include "corrspec/rng.hpp"

namespace corrspec {

enum class LaserNoiseKind { uniform_random, random_walk, flicker };

struct LaserNoiseModel {
  LaserNoiseKind kind = LaserNoiseKind::uniform_random;
  /// random_walk: step standard deviation per shot (rad).
  /// flicker: standard deviation of each mean-reverting component (rad).
  /// uniform_random: unused.
  double magnitude_rad = 0.0;
  /// flicker: number of components with correlation times 1, 2, 4, ... shots.
  std::uint32_t flicker_components = 8;
};

struct RemoteConfig {
  std::uint64_t n_a = 100;
  std::uint64_t n_b = 100;
  double theta_a = 0.0;
  double theta_b = 0.0;
  double true_dphi_ab = 0.0;
  /// Calibration knowledge of the phase difference and its variance.
  double prior_dphi_ab = 0.0;
  double prior_var = 0.01;
  LaserNoiseModel laser_noise;
  bool synchronized = true;
  double t_s = 3.0;
  /// Shots with |2p - 1| > 1 - edge_epsilon on either clock are excluded.
  double edge_epsilon = 0.05;
  /// Branch separation, in predicted standard deviations, that makes a shot ambiguous.
  double ambiguity_sigmas = 3.0;
};

void validate(const RemoteConfig &config);

std::string_view to_string(LaserNoiseKind kind);
LaserNoiseKind parse_laser_noise_kind(std::string_view name);

/// p_X = (1 + cos(phi_x - phi_l - theta_x)) / 2.
double clock_transition_probability(double phi_x, double phi_l, double theta_x);

/// Principal-branch inversion
///   acos(2 p_a - 1) - acos(2 p_b - 1) + theta_a - theta_b.
/// Probabilities up to 1e-9 outside [0, 1] are clipped; larger excursions throw.
double invert_phase_difference(double p_a, double p_b, double theta_a, double theta_b);

/// Offsets placing the monitored difference at quadrature:
/// theta_a - theta_b = prior - pi/2, with theta_b = 0.
std::pair<double, double> calibrate_quadrature(double prior_dphi_ab);

/// Returns `config` with theta_a, theta_b set from its prior.
RemoteConfig calibrate_quadrature(const RemoteConfig &config);

/// 1/N_A + 1/N_B.
double projection_noise_variance(const RemoteConfig &config);

struct BranchEstimate {
  double estimate = 0.0;   ///< branch closest to the prior, within pi of it
  bool ambiguous = false;  ///< another prior-consistent branch disagrees by > ambiguity_sigmas
  bool edge = false;       ///< a readout lies inside the edge guard band
};

/// Resolve the sign ambiguity of both arccos terms against the calibration prior.
BranchEstimate resolve_phase_difference(double p_hat_a, double p_hat_b, const RemoteConfig &config);

struct RemoteShot {
  double phi_l_a = 0.0;
  double phi_l_b = 0.0;
  double p_hat_a = 0.0;
  double p_hat_b = 0.0;
  double estimate = 0.0;
  bool ambiguous = false;
  bool edge = false;

  bool excluded() const { return ambiguous || edge; }
};

/// One shot with the laser phases seen by each clock supplied by the caller.
RemoteShot simulate_remote_shot(const RemoteConfig &config, double phi_l_a, double phi_l_b,
                                Stream &rng);

/// One shot with a fresh uniformly random laser phase (shared when synchronised).
RemoteShot simulate_remote_shot(const RemoteConfig &config, Stream &rng);

/// Laser phase seen by each clock for shots 0..shots-1. Clock B reuses clock
/// A's sequence when synchronised.
std::pair<std::vector<double>, std::vector<double>>
laser_phase_sequences(const RemoteConfig &config, std::uint64_t shots, std::uint64_t seed);

struct RemoteSummary {
  std::uint64_t shots = 0;
  std::uint64_t used = 0;
  double mean = 0.0;     ///< over non-excluded shots
  double variance = 0.0; ///< unbiased, over non-excluded shots
  double std_error = 0.0;
  double bias = 0.0; ///< mean - true_dphi_ab
  double predicted_variance = 0.0;
  double ambiguity_rate = 0.0;
  double edge_rate = 0.0;
  double excluded_rate = 0.0;
};

struct RemoteRun {
  RemoteSummary summary;
  std::vector<RemoteShot> shots;
};

RemoteRun run_remote_comparison(const RemoteConfig &config, std::uint64_t shots,
                                std::uint64_t seed, unsigned workers = 1);

/// sqrt(1/N_A + 1/N_B) / (2 pi nu sqrt(T tau)).
double comparison_instability(const RemoteConfig &config, double tau, const ClockSpec &spec);

} // namespace corrspec
