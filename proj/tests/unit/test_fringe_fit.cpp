#include "doctest.h"

#include <cmath>
#include <numbers>

#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"

using namespace corrspec;
using std::numbers::pi;

namespace {

// Counts rounded from the exact fringe, so the data carry no sampling noise.
FringeDataset exact_fringe(double contrast, double phase0, std::uint64_t n, double offset = 0.0) {
  FringeDataset data{1.0, {}};
  for (double x : default_phase_grid()) {
    const double p = 0.5 + 0.5 * contrast * std::cos(x + offset + phase0);
    data.points.push_back({x + offset, static_cast<std::uint64_t>(std::llround(p * n)), n});
  }
  return data;
}

double angle_distance(double a, double b) { return std::abs(std::remainder(a - b, 2 * pi)); }

} // namespace

TEST_CASE("log-likelihood equals the binomial sum") {
  const FringeDataset data{1.0, {{0.0, 3, 10}, {1.0, 7, 12}, {2.5, 0, 4}, {4.0, 5, 5}}};
  double direct = 0.0;
  for (const auto &p : data.points) {
    const double prob = 0.5 + 0.5 * 0.3 * std::cos(p.delta_phi_z + 0.7);
    const double k = static_cast<double>(p.n_correlated), n = static_cast<double>(p.n_total);
    direct += std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) +
              k * std::log(prob) + (n - k) * std::log(1 - prob);
  }
  CHECK(fringe_log_likelihood(data, 0.3, 0.7) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("noiseless fringe round trip") {
  const auto fit = fit_fringe_mle(exact_fringe(0.3, 1.0, 1000000));
  CHECK(std::abs(fit.contrast - 0.3) < 1e-3);
  CHECK(angle_distance(fit.phase0, 1.0) < 1e-3);
  CHECK(fit.phase_identifiable);
  CHECK(fit.contrast_ci.contains(fit.contrast));
  CHECK(fit.phase_ci.contains(fit.phase0));
}

TEST_CASE("flat fringe has no contrast and no identifiable phase") {
  FringeDataset data{1.0, {}};
  for (double x : default_phase_grid())
    data.points.push_back({x, 50, 100});
  const auto fit = fit_fringe_mle(data);
  CHECK(fit.contrast == doctest::Approx(0.0).epsilon(1e-6));
  CHECK_FALSE(fit.phase_identifiable);
  CHECK(fit.contrast_ci.lower == 0.0);
  CHECK(std::isinf(fit.phase_sigma()));
}

TEST_CASE("saturated fringe sits on the contrast bound") {
  const auto fit = fit_fringe_mle(exact_fringe(0.5, 2.0, 10000));
  CHECK(fit.contrast == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(fit.contrast_ci.upper == 0.5);
  CHECK(angle_distance(fit.phase0, 2.0) < 1e-3);
}

TEST_CASE("fit is equivariant under phase translation") {
  FringeDataset base{2.0, {}};
  Stream rng(3, stream_tag(StreamModule::test), 0);
  for (double x : default_phase_grid()) {
    const double p = 0.5 + 0.5 * 0.35 * std::cos(x + 0.4);
    std::uint64_t k = 0;
    for (int i = 0; i < 40; ++i)
      k += rng.uniform() < p ? 1 : 0;
    base.points.push_back({x, k, 40});
  }
  const auto ref = fit_fringe_mle(base);
  for (double c : {0.3, -1.7, 5.0}) {
    FringeDataset shifted = base;
    for (auto &p : shifted.points)
      p.delta_phi_z += c;
    const auto fit = fit_fringe_mle(shifted);
    CHECK(std::abs(fit.contrast - ref.contrast) < 1e-6);
    CHECK(angle_distance(fit.phase0, ref.phase0 - c) < 1e-6);
  }
}

TEST_CASE("intervals narrow as one over root n") {
  const auto small = fit_fringe_mle(exact_fringe(0.3, 1.0, 400));
  const auto large = fit_fringe_mle(exact_fringe(0.3, 1.0, 1600));
  CHECK(large.contrast_ci.width() / small.contrast_ci.width() == doctest::Approx(0.5).epsilon(0.2));
  CHECK(large.phase_ci.width() / small.phase_ci.width() == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("fits keep contrast in bounds and intervals around the estimate") {
  const auto grid = default_phase_grid();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto data = simulate_fringe(5.0, grid, allocate_probes(100, grid.size()), ClockSpec{}, seed);
    const auto fit = fit_fringe_mle(data);
    CHECK(fit.contrast >= 0.0);
    CHECK(fit.contrast <= 0.5);
    CHECK(fit.contrast_ci.contains(fit.contrast));
    CHECK(fit.phase_ci.contains(fit.phase0));
    CHECK(fit.phase0 >= 0.0);
    CHECK(fit.phase0 < 2 * pi);
  }
}

TEST_CASE("preconditions on the phase coverage") {
  FringeDataset few{1.0, {{0.0, 1, 2}, {1.0, 1, 2}, {2.0, 1, 2}}};
  CHECK_THROWS_AS(fit_fringe_mle(few), InvalidArgument);
  FringeDataset narrow{1.0, {{0.0, 1, 2}, {1.0, 1, 2}, {2.0, 1, 2}, {3.0, 1, 2}}};
  CHECK_THROWS_AS(fit_fringe_mle(narrow), InvalidArgument);
}

TEST_CASE("contrast interval coverage at the three second point") {
  const ClockSpec spec;
  const double truth = lifetime_contrast(3.0, spec) *
                       detection_contrast_factor(spec.detection_fidelity, spec.detection_fidelity);
  const auto grid = default_phase_grid();
  const auto probes = allocate_probes(300, grid.size());
  int covered = 0;
  for (std::uint32_t r = 0; r < 50; ++r) {
    FringeOptions options;
    options.dataset_id = r;
    covered += fit_fringe_mle(simulate_fringe(3.0, grid, probes, spec, 4242, options))
                       .contrast_ci.contains(truth)
                   ? 1
                   : 0;
  }
  CHECK(covered >= 30);
}

TEST_CASE("decay point uses the larger contrast half-width") {
  FringeFit fit;
  fit.contrast = 0.3;
  fit.contrast_ci = {0.25, 0.32};
  const auto p = decay_point(2.0, fit);
  CHECK(p.t_s == 2.0);
  CHECK(p.contrast == 0.3);
  CHECK(p.sigma == doctest::Approx(0.05));
}
