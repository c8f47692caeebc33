#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"

using namespace corrspec;
using std::numbers::pi;

TEST_CASE("exact line at the measured slope converts to the quoted shift") {
  const ClockSpec spec;
  std::vector<PhasePoint> pts;
  for (double t : kReferenceRamseyTimes)
    pts.push_back({t, 0.2 + 0.84 * t, 0.05});
  const auto fit = fit_phase_drift(pts, spec);
  CHECK(fit.slope == doctest::Approx(0.84).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(fit.fractional_shift - 1.19e-16) <= 0.08e-16);
  CHECK(fit.fractional_shift == doctest::Approx(fit.slope / (2 * pi * spec.nu_hz)));
  CHECK(fit.fractional_shift_err == doctest::Approx(fit.slope_err / (2 * pi * spec.nu_hz)));
}

TEST_CASE("shift to slope conversion") {
  const ClockSpec spec;
  CHECK(std::abs(drift_slope_for_shift(1.19e-16, spec) - 0.84) <= 0.06);
  CHECK(drift_slope_for_shift(1.32e-16, spec) == doctest::Approx(2 * pi * 1.121e15 * 1.32e-16));
}

TEST_CASE("two-point drift") {
  const std::vector<PhasePoint> pts{{0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}};
  const auto fit = fit_phase_drift(pts, ClockSpec{});
  CHECK(fit.slope == doctest::Approx(1.0));
  CHECK(fit.slope_err == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("weighted least squares errors") {
  // Oracle: covariance (X^T W X)^-1 evaluated by hand for three points.
  const std::vector<PhasePoint> pts{{0.0, 0.1, 0.1}, {1.0, 0.9, 0.2}, {3.0, 3.2, 0.1}};
  const auto fit = fit_phase_drift(pts, ClockSpec{});
  const double sw = 100 + 25 + 100, st = 0 + 25 + 300, stt = 0 + 25 + 900;
  const double det = sw * stt - st * st;
  CHECK(fit.slope_err == doctest::Approx(std::sqrt(sw / det)));
  CHECK(fit.intercept_err == doctest::Approx(std::sqrt(stt / det)));
}

TEST_CASE("singular drift design is rejected") {
  const std::vector<PhasePoint> pts{{2.0, 0.0, 1.0}, {2.0, 1.0, 1.0}};
  CHECK_THROWS_AS(fit_phase_drift(pts, ClockSpec{}), InvalidArgument);
  const std::vector<PhasePoint> one{{2.0, 0.0, 1.0}};
  CHECK_THROWS_AS(fit_phase_drift(one, ClockSpec{}), InvalidArgument);
}

TEST_CASE("unwrapping removes two-pi jumps") {
  const std::vector<double> wrapped{0.1, 2.0, 4.0, 6.0, 1.6, 3.5};
  const auto out = unwrap_phases(wrapped);
  const std::vector<double> expected{0.1, 2.0, 4.0, 6.0, 1.6 + 2 * pi, 3.5 + 2 * pi};
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out[i] == doctest::Approx(expected[i]));
  const auto shifted = unwrap_phases(std::vector<double>{5.0, 5.5});
  CHECK(shifted[0] == doctest::Approx(5.0 - 2 * pi));
  CHECK(shifted[1] - shifted[0] == doctest::Approx(0.5));
}

TEST_CASE("wrap phase into [0, 2pi)") {
  CHECK(wrap_phase(-0.5) == doctest::Approx(2 * pi - 0.5));
  CHECK(wrap_phase(7.0) == doctest::Approx(7.0 - 2 * pi));
  CHECK(wrap_phase(2 * pi) == 0.0);
}

TEST_CASE("extrapolation to one second") {
  CHECK(extrapolate_sigma1s(1.1e-17, 1126.0) == doctest::Approx(3.69e-16).epsilon(0.002));
  CHECK(extrapolate_sigma1s(2e-16, 1.0) == 2e-16);
  const double s1 = 3e-16;
  // sigma(tau) = s1 / sqrt(tau), so sigma(4 tau) is half of sigma(tau).
  CHECK(extrapolate_sigma1s(s1 / 2 / std::sqrt(5.0), 20.0) ==
        doctest::Approx(extrapolate_sigma1s(s1 / std::sqrt(5.0), 5.0) / 2 * 2));
  CHECK_THROWS_AS(extrapolate_sigma1s(1.0, 0.0), InvalidArgument);
}

TEST_CASE("fractional uncertainty from a phase uncertainty") {
  const ClockSpec spec;
  CHECK(fractional_uncertainty_from_phase(0.1, 3.0, spec) ==
        doctest::Approx(0.1 / (2 * pi * spec.nu_hz * 3.0)));
}

TEST_CASE("allan deviation of trivial series") {
  const std::vector<double> flat(64, 3.5);
  for (const auto &p : allan_deviation(flat, 1.0))
    CHECK(p.sigma_y < 1e-12);

  std::vector<double> alt(64);
  for (std::size_t i = 0; i < alt.size(); ++i)
    alt[i] = i % 2 ? 1.0 : -1.0;
  const auto points = allan_deviation(alt, 0.5);
  REQUIRE(!points.empty());
  CHECK(points[0].tau_s == 0.5);
  CHECK(points[0].sigma_y == doctest::Approx(std::sqrt(2.0)));
  CHECK(points[0].terms == 63);
}

TEST_CASE("allan deviation octave ladder stops at two windows") {
  const std::vector<double> y(10, 0.0);
  const auto points = allan_deviation(y, 1.0);
  REQUIRE(points.size() == 3);
  CHECK(points.back().tau_s == 4.0);
  CHECK_THROWS_AS(allan_deviation(std::vector<double>{1.0, 2.0}, 1.0), InvalidArgument);
}

TEST_CASE("white frequency noise falls as tau to the minus one half") {
  std::mt19937_64 gen(12345);
  std::normal_distribution<double> normal;
  std::vector<double> y(1 << 16);
  for (double &v : y)
    v = normal(gen);
  const auto points = allan_deviation(y, 1.0);
  // Log-log least squares over tau up to 1/64 of the record.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const auto &p : points) {
    if (p.tau_s > y.size() / 64.0)
      break;
    const double lx = std::log(p.tau_s), ly = std::log(p.sigma_y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.1));
}
