#include "corrspec/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corrspec/errors.hpp"
#include "parallel.hpp"

namespace corrspec {

using detail::fail;
using detail::require;

void validate(const ProbeConfig &config) {
  if (!(std::isfinite(config.t_s) && config.t_s > 0.0))
    fail("probe t_s must be > 0");
  for (double y : config.y_offsets)
    if (!(std::isfinite(y) && std::abs(y) < 1e-6))
      fail("probe y_offsets must satisfy |y| < 1e-6");
  if (!std::isfinite(config.delta_phi_z))
    fail("probe delta_phi_z must be finite");
}

void validate(const FringeDataset &data) {
  if (!(std::isfinite(data.t_s) && data.t_s > 0.0))
    fail("fringe dataset t_s must be > 0");
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const auto &p = data.points[i];
    if (!std::isfinite(p.delta_phi_z))
      fail("fringe point phase must be finite");
    if (p.n_total == 0)
      fail("fringe point n_total must be > 0");
    if (p.n_correlated > p.n_total)
      fail("fringe point n_correlated exceeds n_total");
    if (i > 0 && !(p.delta_phi_z > data.points[i - 1].delta_phi_z))
      fail("fringe phases must be strictly increasing");
  }
}

namespace {

struct Bloch {
  double x, y, z;
};

// Rotation by pi/2 about the x axis.
Bloch half_pi_pulse(Bloch v) { return {v.x, -v.z, v.y}; }

// Free evolution in the laser frame: precession by dphi, then amplitude damping
// with survival probability `keep` of the upper state.
Bloch evolve(Bloch v, double dphi, double keep) {
  const double c = std::cos(dphi), s = std::sin(dphi);
  const double coherence = std::sqrt(keep);
  return {coherence * (v.x * c - v.y * s), coherence * (v.x * s + v.y * c),
          keep * (v.z + 1.0) - 1.0};
}

} // namespace

double decayed_flip_probability(ClockState initial, double dphi, double t, double t_prime) {
  require(std::isfinite(dphi), "phase must be finite");
  require(t >= 0.0 && t_prime > 0.0, "invalid free-evolution or lifetime");
  const double z0 = initial == ClockState::excited ? 1.0 : -1.0;
  Bloch v{0.0, 0.0, z0};
  v = half_pi_pulse(v);
  v = evolve(v, dphi, std::exp(-t / t_prime));
  v = half_pi_pulse(v);
  const double p_excited = std::clamp(0.5 * (1.0 + v.z), 0.0, 1.0);
  return initial == ClockState::ground ? p_excited : 1.0 - p_excited;
}

JointOutcome simulate_probe(const ProbeConfig &config, const ClockSpec &spec, Stream &rng,
                            std::array<ClockState, 2> &states) {
  const double phi_laser = kTwoPi * rng.uniform();
  const std::array<double, 2> dphi{
      phi_laser + kTwoPi * spec.nu_hz * config.y_offsets[0] * config.t_s,
      phi_laser + config.delta_phi_z + kTwoPi * spec.nu_hz * config.y_offsets[1] * config.t_s};

  std::array<bool, 2> flipped{};
  for (std::size_t i = 0; i < 2; ++i) {
    const double p = decayed_flip_probability(states[i], dphi[i], config.t_s, spec.t_prime_s);
    flipped[i] = rng.uniform() < p;
    if (flipped[i])
      states[i] = states[i] == ClockState::ground ? ClockState::excited : ClockState::ground;
  }
  const double misassign = 1.0 - spec.detection_fidelity;
  for (std::size_t i = 0; i < 2; ++i)
    if (rng.uniform() < misassign)
      flipped[i] = !flipped[i];
  return {flipped[0], flipped[1]};
}

JointOutcome simulate_probe(const ProbeConfig &config, const ClockSpec &spec, Stream &rng) {
  std::array<ClockState, 2> states{ClockState::ground, ClockState::ground};
  return simulate_probe(config, spec, rng, states);
}

FringeDataset simulate_fringe(double t, std::span<const double> grid,
                              std::span<const std::uint64_t> probes, const ClockSpec &spec,
                              std::uint64_t seed, const FringeOptions &options) {
  validate(spec);
  require(!grid.empty(), "phase grid must not be empty");
  require(grid.size() == probes.size(), "phase grid and probe counts differ in length");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(probes[i] > 0, "probes per point must be > 0");
    require(probes[i] < (std::uint64_t{1} << 32), "probes per point must fit in 32 bits");
  }

  FringeDataset out;
  out.t_s = t;
  out.points.resize(grid.size());
  const std::uint32_t tag = stream_tag(StreamModule::protocol, options.dataset_id);

  ProbeConfig base;
  base.t_s = t;
  base.y_offsets = options.y_offsets;
  base.seed = seed;
  validate(base);

  detail::parallel_for(grid.size(), options.workers, [&](std::size_t i) {
    ProbeConfig config = base;
    config.delta_phi_z = grid[i];
    std::array<ClockState, 2> states{ClockState::ground, ClockState::ground};
    std::uint64_t correlated = 0;
    for (std::uint64_t k = 0; k < probes[i]; ++k) {
      Stream rng(seed, tag, (static_cast<std::uint64_t>(i) << 32) | k);
      correlated += simulate_probe(config, spec, rng, states).correlated() ? 1 : 0;
    }
    out.points[i] = {grid[i], correlated, probes[i]};
  });
  validate(out);
  return out;
}

FringeDataset simulate_fringe(double t, std::span<const double> grid,
                              std::uint64_t probes_per_point, const ClockSpec &spec,
                              std::uint64_t seed, const FringeOptions &options) {
  const std::vector<std::uint64_t> probes(grid.size(), probes_per_point);
  return simulate_fringe(t, grid, probes, spec, seed, options);
}

std::vector<std::uint64_t> allocate_probes(std::uint64_t total, std::size_t points) {
  require(points > 0, "cannot allocate probes over an empty grid");
  require(total >= points, "fewer probes than grid points");
  std::vector<std::uint64_t> out(points, total / points);
  for (std::size_t i = 0; i < total % points; ++i)
    ++out[i];
  return out;
}

std::vector<double> phase_grid(std::size_t points, double start, double step) {
  require(points > 0 && step > 0.0, "phase grid needs points > 0 and step > 0");
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = start + step * static_cast<double>(i);
  return out;
}

std::vector<double> default_phase_grid() { return phase_grid(24, 0.0, kTwoPi / 20.0); }

std::vector<FringeDataset> coherence_scan(std::span<const double> t_list,
                                          std::span<const std::uint64_t> probe_totals,
                                          std::span<const double> grid, const ClockSpec &spec,
                                          std::uint64_t seed, const FringeOptions &options) {
  require(t_list.size() == probe_totals.size(), "Ramsey times and probe counts differ in length");
  require(!t_list.empty(), "coherence scan needs at least one Ramsey time");
  std::vector<FringeDataset> out;
  out.reserve(t_list.size());
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    FringeOptions per = options;
    per.dataset_id = options.dataset_id + static_cast<std::uint32_t>(i);
    const auto probes = allocate_probes(probe_totals[i], grid.size());
    out.push_back(simulate_fringe(t_list[i], grid, probes, spec, seed, per));
  }
  return out;
}

double session_duration(double t, std::uint64_t n_probes, const ClockSpec &spec) {
  require(n_probes > 0, "session needs at least one probe");
  require(t > 0.0, "free-evolution time must be > 0");
  return static_cast<double>(n_probes) * (t + spec.session_overhead_s);
}

} // namespace corrspec
