#include "doctest.h"

#include <cmath>
#include <vector>

#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"

using namespace corrspec;

namespace {

std::vector<DecayPoint> on_curve(double c0, double t_c, double sigma) {
  std::vector<DecayPoint> out;
  for (double t : kReferenceRamseyTimes)
    out.push_back({t, c0 * std::exp(-t / t_c), sigma});
  return out;
}

// Weighted least squares by brute force: c0 solved in closed form per t_c.
double least_squares_t_c(const std::vector<DecayPoint> &pts, double lo, double hi) {
  double best = 0.0, best_chi = INFINITY;
  for (double t_c = lo; t_c <= hi; t_c += 1e-4) {
    double num = 0.0, den = 0.0;
    for (const auto &p : pts) {
      const double g = std::exp(-p.t_s / t_c), w = 1.0 / (p.sigma * p.sigma);
      num += w * p.contrast * g;
      den += w * g * g;
    }
    const double c0 = num / den;
    double chi = 0.0;
    for (const auto &p : pts) {
      const double r = (p.contrast - c0 * std::exp(-p.t_s / t_c)) / p.sigma;
      chi += r * r;
    }
    if (chi < best_chi) {
      best_chi = chi;
      best = t_c;
    }
  }
  return best;
}

} // namespace

TEST_CASE("noiseless decay is recovered") {
  const auto pts = on_curve(0.5, 9.7, 1e-5);
  const auto fit = fit_contrast_decay(pts);
  CHECK(fit.t_c == doctest::Approx(9.7).epsilon(1e-4));
  CHECK(fit.c0 == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("interval ordering respects the prior support") {
  for (double t_c : {3.0, 9.7, 20.6, 24.0}) {
    auto pts = on_curve(0.45, t_c, 0.04);
    pts[2].contrast += 0.03;
    pts[4].contrast -= 0.02;
    const auto fit = fit_contrast_decay(pts);
    CHECK(fit.prior_bounds.lower <= fit.ci_lower);
    CHECK(fit.ci_lower <= fit.t_c);
    CHECK(fit.t_c <= fit.ci_upper);
    CHECK(fit.ci_upper <= fit.prior_bounds.upper);
    CHECK(fit.prior_bounds.upper == 25.0);
  }
}

TEST_CASE("flat data push the posterior against the upper prior bound") {
  const auto pts = on_curve(0.4, 1e9, 0.05);
  const auto fit = fit_contrast_decay(pts);
  CHECK(fit.ci_upper <= 25.0);
  CHECK(fit.t_c > 20.0);
}

TEST_CASE("small errors and a broad prior reduce to least squares") {
  std::vector<DecayPoint> pts = on_curve(0.42, 7.5, 0.002);
  const double wiggle[] = {0.0015, -0.001, 0.0007, -0.002, 0.0012, -0.0004};
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i].contrast += wiggle[i];
  const auto fit = fit_contrast_decay(pts, {0.0, 60.0});
  CHECK(fit.t_c == doctest::Approx(least_squares_t_c(pts, 5.0, 10.0)).epsilon(0.01));
}

TEST_CASE("non-positive contrasts are likelihood terms, not errors") {
  auto pts = on_curve(0.3, 4.0, 0.05);
  pts.back().contrast = 0.0;
  pts.push_back({6.0, -0.02, 0.05});
  CHECK_NOTHROW(fit_contrast_decay(pts));
}

TEST_CASE("decay fit preconditions") {
  std::vector<DecayPoint> two{{1.0, 0.4, 0.01}, {2.0, 0.3, 0.01}, {2.0, 0.31, 0.01}};
  CHECK_THROWS_AS(fit_contrast_decay(two), InvalidArgument);
  auto pts = on_curve(0.5, 9.7, 0.01);
  pts[0].sigma = 0.0;
  CHECK_THROWS_AS(fit_contrast_decay(pts), InvalidArgument);
  CHECK_THROWS_AS(fit_contrast_decay(on_curve(0.5, 9.7, 0.01), {5.0, 1.0}), InvalidArgument);
}

TEST_CASE("log posterior peaks at the generating coherence time") {
  const auto pts = on_curve(0.5, 12.0, 0.01);
  const double at = contrast_decay_log_posterior(pts, 12.0);
  CHECK(at > contrast_decay_log_posterior(pts, 10.0));
  CHECK(at > contrast_decay_log_posterior(pts, 14.0));
  CHECK_THROWS_AS(contrast_decay_log_posterior(pts, 0.0), InvalidArgument);
}
