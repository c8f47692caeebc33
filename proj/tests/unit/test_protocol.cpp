#include "doctest.h"

#include <cmath>
#include <numbers>

#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"
#include "corrspec/protocol.hpp"

using namespace corrspec;
using std::numbers::pi;

namespace {

ClockSpec ideal_spec() {
  ClockSpec spec;
  spec.detection_fidelity = 1.0;
  return spec;
}

double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

double correlated_fraction(const ProbeConfig &config, const ClockSpec &spec, std::uint64_t seed,
                           std::uint32_t sub, int probes) {
  int hits = 0;
  for (int k = 0; k < probes; ++k) {
    Stream rng(seed, stream_tag(StreamModule::test, sub), static_cast<std::uint64_t>(k));
    hits += simulate_probe(config, spec, rng).correlated() ? 1 : 0;
  }
  return static_cast<double>(hits) / probes;
}

} // namespace

TEST_CASE("decayed flip probability matches the amplitude-damping closed form") {
  // Ground or excited start: 1/2 (1 + exp(-t / 2T') cos dphi).
  for (auto initial : {ClockState::ground, ClockState::excited})
    for (double t : {0.0, 0.7, 5.0, 40.0})
      for (double dphi : {0.0, 0.4, pi / 2, 2.9, -1.3}) {
        const double expected = 0.5 * (1.0 + std::exp(-t / (2 * 20.6)) * std::cos(dphi));
        CHECK(decayed_flip_probability(initial, dphi, t, 20.6) ==
              doctest::Approx(expected).epsilon(1e-12));
      }
}

TEST_CASE("ideal short probes follow the laser-averaged fringe extremes") {
  ProbeConfig config;
  config.t_s = 1e-9;
  config.delta_phi_z = 0.0;
  CHECK(std::abs(correlated_fraction(config, ideal_spec(), 3, 0, 20000) - 0.75) <= 0.01);
  config.delta_phi_z = pi;
  CHECK(std::abs(correlated_fraction(config, ideal_spec(), 3, 1, 20000) - 0.25) <= 0.01);
}

TEST_CASE("quadrature probes give a fair coin") {
  ProbeConfig config;
  config.t_s = 1e-9;
  config.delta_phi_z = pi / 2;
  const double fraction = correlated_fraction(config, ideal_spec(), 11, 0, 10000);
  CHECK(std::abs(fraction - 0.5) <= 0.015);
}

TEST_CASE("outcome correlation flag follows the flips") {
  CHECK(JointOutcome{true, true}.correlated());
  CHECK(JointOutcome{false, false}.correlated());
  CHECK_FALSE(JointOutcome{true, false}.correlated());
  CHECK_FALSE(JointOutcome{false, true}.correlated());
}

TEST_CASE("carried states toggle on every physical flip") {
  ProbeConfig config;
  config.t_s = 2.0;
  config.delta_phi_z = 1.1;
  const ClockSpec spec = ideal_spec();
  std::array<ClockState, 2> states{ClockState::ground, ClockState::excited};
  for (std::uint64_t k = 0; k < 500; ++k) {
    const auto before = states;
    Stream rng(5, stream_tag(StreamModule::test), k);
    const auto outcome = simulate_probe(config, spec, rng, states);
    CHECK((states[0] != before[0]) == outcome.flipped_1);
    CHECK((states[1] != before[1]) == outcome.flipped_2);
  }
}

TEST_CASE("marginal correlation converges to the averaged fringe") {
  // Decay and imperfect readout together: C = lifetime contrast times d_eff.
  ClockSpec spec;
  ProbeConfig config;
  config.t_s = 3.0;
  const double contrast = lifetime_contrast(3.0, spec) *
                          detection_contrast_factor(spec.detection_fidelity,
                                                    spec.detection_fidelity);
  constexpr int kProbes = 100000;
  constexpr int kRuns = 40;
  int within = 0;
  for (int run = 0; run < kRuns; ++run) {
    config.delta_phi_z = 2 * pi * run / kRuns;
    const double expected = averaged_correlation(config.delta_phi_z, contrast);
    const double got = correlated_fraction(config, spec, 100 + run, 1, kProbes);
    within += std::abs(got - expected) < 3 * binomial_sigma(expected, kProbes) ? 1 : 0;
  }
  CHECK(within >= kRuns - 1);
}

TEST_CASE("common frequency offset acts like a laser phase shift and cancels") {
  const ClockSpec spec = ideal_spec();
  ProbeConfig config;
  config.t_s = 1.0;
  config.delta_phi_z = 0.8;
  constexpr int kProbes = 40000;
  const double expected = averaged_correlation(0.8, lifetime_contrast(1.0, spec));
  for (double y : {0.0, 1e-16, 7.3e-16, -4e-15}) {
    config.y_offsets = {y, y};
    const double got = correlated_fraction(config, spec, 21, 2, kProbes);
    CHECK(std::abs(got - expected) < 3 * binomial_sigma(expected, kProbes));
  }
}

TEST_CASE("probe config validation") {
  ProbeConfig config;
  CHECK_NOTHROW(validate(config));
  config.t_s = 0.0;
  CHECK_THROWS_AS(validate(config), InvalidArgument);
  config = {};
  config.y_offsets = {0.0, 2e-6};
  CHECK_THROWS_AS(validate(config), InvalidArgument);
  config = {};
  config.delta_phi_z = NAN;
  CHECK_THROWS_AS(validate(config), InvalidArgument);
}

TEST_CASE("fringe simulation is reproducible and independent of worker count") {
  const auto grid = default_phase_grid();
  const ClockSpec spec;
  FringeOptions serial, parallel;
  parallel.workers = 4;
  const auto a = simulate_fringe(2.0, grid, 50, spec, 99, serial);
  const auto b = simulate_fringe(2.0, grid, 50, spec, 99, parallel);
  const auto c = simulate_fringe(2.0, grid, 50, spec, 100, serial);
  REQUIRE(a.points.size() == grid.size());
  bool any_difference = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a.points[i].n_correlated == b.points[i].n_correlated);
    CHECK(a.points[i].n_total == 50);
    CHECK(a.points[i].delta_phi_z == grid[i]);
    any_difference |= a.points[i].n_correlated != c.points[i].n_correlated;
  }
  CHECK(any_difference);
}

TEST_CASE("fringe simulation rejects empty work") {
  const auto grid = default_phase_grid();
  CHECK_THROWS_AS(simulate_fringe(1.0, grid, 0, ClockSpec{}, 1), InvalidArgument);
  CHECK_THROWS_AS(simulate_fringe(1.0, std::span<const double>{}, 5, ClockSpec{}, 1),
                  InvalidArgument);
}

TEST_CASE("short ideal fringe recovers the lifetime contrast") {
  const ClockSpec spec = ideal_spec();
  const auto grid = default_phase_grid();
  const auto probes = allocate_probes(1500, grid.size());
  const auto data = simulate_fringe(0.1, grid, probes, spec, 2024);
  const auto fit = fit_fringe_mle(data);
  CHECK(std::abs(fit.contrast - 0.5 * std::exp(-0.1 / 20.6)) <= 3 * fit.contrast_sigma());
}

TEST_CASE("ideal contrast tracks the lifetime at long probe times") {
  const ClockSpec spec = ideal_spec();
  const auto grid = default_phase_grid();
  for (double t : {2.0, 10.0, 20.6}) {
    const auto data = simulate_fringe(t, grid, 2000, spec, 77);
    const auto fit = fit_fringe_mle(data);
    CHECK(std::abs(fit.contrast - lifetime_contrast(t, spec)) <= 3 * fit.contrast_sigma());
  }
}

TEST_CASE("wide grid covers two full fringe periods") {
  const auto grid = phase_grid(200, 0.0, 2.5 * 2 * pi / 199);
  int crossings = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = averaged_correlation(grid[i - 1], 0.5) - 0.5;
    const double b = averaged_correlation(grid[i], 0.5) - 0.5;
    crossings += (a > 0) != (b > 0) ? 1 : 0;
  }
  CHECK(crossings >= 4);
}

TEST_CASE("probe allocation and grids") {
  const auto probes = allocate_probes(100, 24);
  std::uint64_t total = 0;
  for (auto p : probes) {
    total += p;
    CHECK((p == 4 || p == 5));
  }
  CHECK(total == 100);
  CHECK(probes.front() == 5);
  CHECK(probes.back() == 4);
  CHECK_THROWS_AS(allocate_probes(3, 24), InvalidArgument);
  const auto grid = default_phase_grid();
  CHECK(grid.size() == 24);
  CHECK(grid[23] == doctest::Approx(23 * 2 * pi / 20));
}

TEST_CASE("coherence scan uses reference defaults and checks lengths") {
  CHECK(kReferenceRamseyTimes == std::array<double, 6>{0.1, 0.5, 1.0, 2.0, 3.0, 5.0});
  CHECK(kReferenceProbeCounts == std::array<std::uint64_t, 6>{1500, 600, 600, 360, 300, 100});
  const auto grid = default_phase_grid();
  const ClockSpec spec;
  const auto scan = coherence_scan(kReferenceRamseyTimes, kReferenceProbeCounts, grid, spec, 5);
  REQUIRE(scan.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(scan[i].t_s == kReferenceRamseyTimes[i]);
    std::uint64_t total = 0;
    for (const auto &p : scan[i].points)
      total += p.n_total;
    CHECK(total == kReferenceProbeCounts[i]);
  }

  const std::array<double, 2> times{1.0, 2.0};
  const std::array<std::uint64_t, 1> counts{100};
  CHECK_THROWS_AS(coherence_scan(times, counts, grid, spec, 5), InvalidArgument);
}

TEST_CASE("single-entry scan equals a direct fringe simulation") {
  const auto grid = default_phase_grid();
  const ClockSpec spec;
  const std::array<double, 1> times{3.0};
  const std::array<std::uint64_t, 1> counts{300};
  const auto scan = coherence_scan(times, counts, grid, spec, 8);
  const auto direct = simulate_fringe(3.0, grid, allocate_probes(300, grid.size()), spec, 8);
  REQUIRE(scan.size() == 1);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(scan[0].points[i].n_correlated == direct.points[i].n_correlated);
}

TEST_CASE("replicate-mean fitted contrast decreases with probe time") {
  const auto grid = default_phase_grid();
  const ClockSpec spec;
  std::array<double, 6> mean{};
  constexpr int kReplicates = 20;
  for (int r = 0; r < kReplicates; ++r) {
    FringeOptions options;
    options.dataset_id = static_cast<std::uint32_t>(10 * r);
    const auto scan =
        coherence_scan(kReferenceRamseyTimes, kReferenceProbeCounts, grid, spec, 31, options);
    for (std::size_t i = 0; i < 6; ++i)
      mean[i] += fit_fringe_mle(scan[i]).contrast / kReplicates;
  }
  for (std::size_t i = 1; i < 6; ++i)
    CHECK(mean[i] < mean[i - 1]);
}

TEST_CASE("session duration bookkeeping") {
  ClockSpec spec;
  CHECK(session_duration(3.0, 300, spec) == doctest::Approx(1125.9));
  spec.session_overhead_s = 0.0;
  CHECK(session_duration(3.0, 300, spec) == doctest::Approx(900.0));
  spec.session_overhead_s = 0.753;
  CHECK(session_duration(3.0, 1, spec) == doctest::Approx(3.753));
  CHECK_THROWS_AS(session_duration(3.0, 0, spec), InvalidArgument);
}

TEST_CASE("fringe dataset validation") {
  FringeDataset data{1.0, {{0.0, 3, 5}, {1.0, 2, 5}}};
  CHECK_NOTHROW(validate(data));
  data.points[1].delta_phi_z = 0.0;
  CHECK_THROWS_AS(validate(data), InvalidArgument);
  data = {1.0, {{0.0, 6, 5}}};
  CHECK_THROWS_AS(validate(data), InvalidArgument);
  data = {1.0, {{0.0, 0, 0}}};
  CHECK_THROWS_AS(validate(data), InvalidArgument);
}
