#pragma once

// Monte-Carlo model of the two-atom correlation Ramsey sequence: random common
// laser phase, spontaneous decay during free evolution, readout errors.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "corrspec/core.hpp"
#include "corrspec/rng.hpp"

namespace corrspec {

enum class ClockState : std::uint8_t { ground = 0, excited = 1 };

struct ProbeConfig {
  double t_s = 1.0;
  /// Fractional frequency offset of each atom relative to the laser.
  std::array<double, 2> y_offsets{0.0, 0.0};
  /// Applied differential phase k.(r1 - r2); carried entirely by atom 2.
  double delta_phi_z = 0.0;
  std::uint64_t seed = 0;
};

void validate(const ProbeConfig &config);

struct JointOutcome {
  bool flipped_1 = false;
  bool flipped_2 = false;

  bool correlated() const { return flipped_1 == flipped_2; }
};

struct FringePoint {
  double delta_phi_z = 0.0;
  std::uint64_t n_correlated = 0;
  std::uint64_t n_total = 0;
};

struct FringeDataset {
  double t_s = 0.0;
  std::vector<FringePoint> points;
};

/// Throws InvalidArgument unless counts are consistent and phases strictly increase.
void validate(const FringeDataset &data);

/// Probability that one atom ends in the other clock state after the
/// pi/2 - free evolution - pi/2 sequence, computed by propagating its Bloch
/// vector through an amplitude-damping channel with decay time t_prime.
double decayed_flip_probability(ClockState initial, double dphi, double t, double t_prime);

/// One interrogation. `states` holds the atoms' clock states before the probe
/// and is updated to the physical states after it.
JointOutcome simulate_probe(const ProbeConfig &config, const ClockSpec &spec, Stream &rng,
                            std::array<ClockState, 2> &states);

/// One interrogation starting from both atoms in the ground state.
JointOutcome simulate_probe(const ProbeConfig &config, const ClockSpec &spec, Stream &rng);

struct FringeOptions {
  std::array<double, 2> y_offsets{0.0, 0.0};
  /// Distinguishes datasets that share a seed (e.g. the entries of a scan).
  std::uint32_t dataset_id = 0;
  unsigned workers = 1;
};

/// Simulate `probes[i]` interrogations at phase_grid[i].
FringeDataset simulate_fringe(double t, std::span<const double> phase_grid,
                              std::span<const std::uint64_t> probes, const ClockSpec &spec,
                              std::uint64_t seed, const FringeOptions &options = {});

/// Same number of probes at every grid point.
FringeDataset simulate_fringe(double t, std::span<const double> phase_grid,
                              std::uint64_t probes_per_point, const ClockSpec &spec,
                              std::uint64_t seed, const FringeOptions &options = {});

/// Split `total` probes across `points` grid points as evenly as possible,
/// earlier points receiving the remainder.
std::vector<std::uint64_t> allocate_probes(std::uint64_t total, std::size_t points);

/// Evenly spaced grid start, start + step, ...
std::vector<double> phase_grid(std::size_t points, double start, double step);

/// 24 points spaced 2pi/20 apart, i.e. a little more than one full fringe.
std::vector<double> default_phase_grid();

/// Ramsey times and probe totals of the reference scan.
inline constexpr std::array<double, 6> kReferenceRamseyTimes{0.1, 0.5, 1.0, 2.0, 3.0, 5.0};
inline constexpr std::array<std::uint64_t, 6> kReferenceProbeCounts{1500, 600, 600, 360, 300, 100};

/// One fringe per Ramsey time; probe_totals[i] probes are spread across the grid.
/// Dataset i uses dataset_id = options.dataset_id + i.
std::vector<FringeDataset> coherence_scan(std::span<const double> t_list,
                                          std::span<const std::uint64_t> probe_totals,
                                          std::span<const double> grid, const ClockSpec &spec,
                                          std::uint64_t seed, const FringeOptions &options = {});

/// Wall-clock length of n_probes interrogations with spec.session_overhead_s
/// dead time each.
double session_duration(double t, std::uint64_t n_probes, const ClockSpec &spec);

} // namespace corrspec
