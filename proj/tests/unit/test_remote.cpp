#include "doctest.h"

#include <cmath>
#include <tuple>
#include <numbers>

#include "corrspec/errors.hpp"
#include "corrspec/remote.hpp"

using namespace corrspec;
using std::numbers::pi;

namespace {

RemoteConfig calibrated(std::uint64_t n, double truth = 0.3) {
  RemoteConfig config;
  config.n_a = config.n_b = n;
  config.true_dphi_ab = truth;
  config.prior_dphi_ab = truth;
  return calibrate_quadrature(config);
}

} // namespace

TEST_CASE("clock transition probability") {
  CHECK(clock_transition_probability(1.0 + 0.4, 1.0, 0.4) == doctest::Approx(1.0));
  CHECK(clock_transition_probability(pi / 2 + 0.2 + 0.1, 0.2, 0.1) == doctest::Approx(0.5));
  for (double x : {-2.0, 0.3, 1.7, 5.5})
    CHECK(clock_transition_probability(x, 0.6, -0.9) ==
          doctest::Approx(0.5 * (1 + std::cos(x - 0.6 + 0.9))));
  CHECK_THROWS_AS(clock_transition_probability(NAN, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("principal-branch inversion examples") {
  CHECK(invert_phase_difference(0.5, 0.5, pi / 2, 0.0) == doctest::Approx(pi / 2));
  CHECK(invert_phase_difference(1.0, 0.5, 0.0, 0.0) == doctest::Approx(-pi / 2));
  CHECK(invert_phase_difference(1.0 + 5e-10, -5e-10, 0.0, 0.0) == doctest::Approx(-pi));
  CHECK_THROWS_AS(invert_phase_difference(1.01, 0.5, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(invert_phase_difference(0.5, -0.2, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("forward-inverse round trip on the principal branch") {
  Stream rng(1, stream_tag(StreamModule::test), 0);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const double truth = -1.0 + 2.0 * rng.uniform();
    const double theta_a = truth - pi / 2, theta_b = 0.0;
    const double phi_l = 2 * pi * rng.uniform();
    const double arg_a = std::remainder(truth - phi_l - theta_a, 2 * pi);
    const double arg_b = std::remainder(0.0 - phi_l - theta_b, 2 * pi);
    // acos loses precision next to 0 and pi, so stay 1e-3 inside the branch.
    if (arg_a < 1e-3 || arg_b < 1e-3 || arg_a > pi - 1e-3 || arg_b > pi - 1e-3)
      continue;
    const double p_a = clock_transition_probability(truth, phi_l, theta_a);
    const double p_b = clock_transition_probability(0.0, phi_l, theta_b);
    const double got = invert_phase_difference(p_a, p_b, theta_a, theta_b);
    CHECK(std::abs(got - truth) < 1e-12);
    ++checked;
  }
  CHECK(checked > 2000);
}

TEST_CASE("quadrature calibration") {
  auto [a0, b0] = calibrate_quadrature(0.0);
  CHECK(a0 - b0 == doctest::Approx(-pi / 2));
  auto [a1, b1] = calibrate_quadrature(pi / 2);
  CHECK(a1 - b1 == doctest::Approx(0.0));
  RemoteConfig config;
  config.prior_dphi_ab = 1.2;
  const auto out = calibrate_quadrature(config);
  CHECK(config.prior_dphi_ab - (out.theta_a - out.theta_b) == doctest::Approx(pi / 2));
}

TEST_CASE("projection noise variance") {
  RemoteConfig config;
  config.n_a = config.n_b = 100;
  CHECK(projection_noise_variance(config) == doctest::Approx(0.02));
  config.n_a = config.n_b = 1;
  CHECK(projection_noise_variance(config) == doctest::Approx(2.0));
}

TEST_CASE("comparison instability") {
  RemoteConfig config;
  config.n_a = config.n_b = 2;
  config.t_s = 1.0;
  ClockSpec spec;
  spec.nu_hz = 1.0 / (2 * pi);
  CHECK(comparison_instability(config, 1.0, spec) == doctest::Approx(1.0));
  config.n_a = config.n_b = 4;
  CHECK(comparison_instability(config, 1.0, spec) == doctest::Approx(1.0 / std::sqrt(2.0)));
  config.n_a = config.n_b = 100;
  config.t_s = 3.0;
  // sqrt(0.02) / (2 pi 1.121e15 sqrt(3)) from mpmath.
  CHECK(comparison_instability(config, 1.0, ClockSpec{}) ==
        doctest::Approx(1.15922807200962846848924777025e-17).epsilon(1e-12));
}

TEST_CASE("large ensembles converge to the true phase difference") {
  const auto config = calibrated(1000000, 0.7);
  const auto run = run_remote_comparison(config, 100, 5);
  int used = 0;
  for (const auto &shot : run.shots)
    if (!shot.excluded()) {
      CHECK(std::abs(shot.estimate - 0.7) < 1e-2);
      ++used;
    }
  CHECK(used > 60);
  CHECK(std::abs(run.summary.mean - 0.7) < 1e-2);
}

TEST_CASE("ambiguity after calibration stays rare") {
  auto config = calibrated(100);
  config.prior_var = 0.01;
  const auto run = run_remote_comparison(config, 10000, 6);
  CHECK(run.summary.ambiguity_rate < 0.05);
  CHECK(run.summary.excluded_rate >= run.summary.ambiguity_rate);
  CHECK(run.summary.excluded_rate >= run.summary.edge_rate);
}

TEST_CASE("ambiguity falls as the prior sharpens") {
  double previous = 2.0;
  for (double var : {0.3, 0.05, 0.005}) {
    auto config = calibrated(100);
    config.prior_var = var;
    const auto rate = run_remote_comparison(config, 10000, 7).summary.ambiguity_rate;
    CHECK(rate < previous);
    previous = rate;
  }
}

TEST_CASE("variance approaches the projection floor for large ensembles") {
  const auto config = calibrated(10000);
  const auto run = run_remote_comparison(config, 200000, 8);
  CHECK(run.summary.variance == doctest::Approx(2e-4).epsilon(0.01));
}

TEST_CASE("synchronised interrogation rejects every laser-noise kind") {
  for (auto kind : {LaserNoiseKind::uniform_random, LaserNoiseKind::random_walk,
                    LaserNoiseKind::flicker}) {
    auto config = calibrated(100);
    config.laser_noise.kind = kind;
    config.laser_noise.magnitude_rad = 1.0;
    const auto s = run_remote_comparison(config, 10000, 9).summary;
    CHECK(std::abs(s.bias) < 3.0 * s.std_error);
    CHECK(s.variance == doctest::Approx(0.02).epsilon(0.1));
  }
}

TEST_CASE("desynchronised random walk restores laser noise") {
  auto config = calibrated(100);
  config.synchronized = false;
  config.laser_noise.kind = LaserNoiseKind::random_walk;
  config.laser_noise.magnitude_rad = 1.0;
  const auto s = run_remote_comparison(config, 10000, 10).summary;
  CHECK(s.variance >= 2.0 * s.predicted_variance);
}

TEST_CASE("laser sequences") {
  RemoteConfig config;
  config.laser_noise.kind = LaserNoiseKind::random_walk;
  config.laser_noise.magnitude_rad = 0.0;
  auto [a, b] = laser_phase_sequences(config, 50, 3);
  CHECK(a == b);
  for (double v : a)
    CHECK(v == a.front());
  config.synchronized = false;
  std::tie(a, b) = laser_phase_sequences(config, 50, 3);
  CHECK(a.front() != b.front());
  config.laser_noise.kind = LaserNoiseKind::uniform_random;
  std::tie(a, b) = laser_phase_sequences(config, 1000, 3);
  for (double v : a) {
    CHECK(v >= 0.0);
    CHECK(v < 2 * pi);
  }
}

TEST_CASE("remote runs are independent of worker count") {
  const auto config = calibrated(100);
  const auto a = run_remote_comparison(config, 2000, 11, 1);
  const auto b = run_remote_comparison(config, 2000, 11, 4);
  CHECK(a.summary.mean == b.summary.mean);
  CHECK(a.summary.variance == b.summary.variance);
}

TEST_CASE("noise kind names round trip") {
  for (auto kind : {LaserNoiseKind::uniform_random, LaserNoiseKind::random_walk,
                    LaserNoiseKind::flicker})
    CHECK(parse_laser_noise_kind(to_string(kind)) == kind);
  CHECK(to_string(LaserNoiseKind::flicker) == "flicker-approximation");
  CHECK_THROWS_AS(parse_laser_noise_kind("pink"), InvalidArgument);
}

TEST_CASE("remote config validation") {
  RemoteConfig config;
  CHECK_NOTHROW(validate(config));
  config.n_a = 0;
  CHECK_THROWS_AS(validate(config), InvalidArgument);
  config = {};
  config.laser_noise.magnitude_rad = -1.0;
  CHECK_THROWS_AS(validate(config), InvalidArgument);
  config = {};
  config.theta_b = INFINITY;
  CHECK_THROWS_AS(validate(config), InvalidArgument);
}
