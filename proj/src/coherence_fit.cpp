#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"

namespace corrspec {

namespace {

// log of the standard-normal upper tail Q(x) = P(Z > x).
double log_upper_tail(double x) {
  if (x < 30.0)
    return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
  const double x2 = x * x;
  return -0.5 * x2 - std::log(x * std::sqrt(2.0 * std::numbers::pi)) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// log P(lo < Z < hi) for a standard normal Z, lo < hi.
double log_normal_mass(double lo, double hi) {
  if (lo >= 0.0) {
    const double a = log_upper_tail(lo), b = log_upper_tail(hi);
    return a + std::log1p(-std::exp(b - a));
  }
  if (hi <= 0.0)
    return log_normal_mass(-hi, -lo);
  return std::log1p(-(std::exp(log_upper_tail(-lo)) + std::exp(log_upper_tail(hi))));
}

struct Conditional {
  double log_post;
  double c0;
};

// Posterior of t_c with c0 integrated over a uniform prior on [0, 1/2].
Conditional conditional(std::span<const DecayPoint> points, double t_c) {
  double A = 0.0, B = 0.0, S = 0.0;
  for (const auto &p : points) {
    const double w = 1.0 / (p.sigma * p.sigma);
    const double g = std::exp(-p.t_s / t_c);
    A += w * g * g;
    B += w * p.contrast * g;
    S += w * p.contrast * p.contrast;
  }
  if (A < 1e-200)
    return {-0.5 * S + std::log(0.5), 0.0};
  const double mean = B / A, root = std::sqrt(A);
  const double log_post = -0.5 * (S - B * mean) - std::log(root) +
                          log_normal_mass(-mean * root, (0.5 - mean) * root);
  return {log_post, std::clamp(mean, 0.0, 0.5)};
}

struct Grid {
  std::vector<double> x, logp;
  double step;
};

Grid evaluate(std::span<const DecayPoint> points, double lo, double hi, std::size_t cells) {
  Grid g;
  g.step = (hi - lo) / static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double x = lo + (static_cast<double>(i) + 0.5) * g.step;
    g.x.push_back(x);
    g.logp.push_back(conditional(points, x).log_post);
  }
  return g;
}

} // namespace

DecayPoint decay_point(double t_s, const FringeFit &fit) {
  return {t_s, fit.contrast, fit.contrast_sigma()};
}

double contrast_decay_log_posterior(std::span<const DecayPoint> points, double t_c) {
  detail::require(t_c > 0.0, "coherence time must be > 0");
  return conditional(points, t_c).log_post;
}

CoherenceFit fit_contrast_decay(std::span<const DecayPoint> points, Interval prior) {
  detail::require(prior.lower >= 0.0 && prior.upper > prior.lower,
                  "coherence prior must satisfy 0 <= lower < upper");
  std::vector<double> times;
  for (const auto &p : points) {
    detail::require(std::isfinite(p.t_s) && p.t_s >= 0.0, "decay point time must be >= 0");
    detail::require(std::isfinite(p.contrast), "decay point contrast must be finite");
    detail::require(std::isfinite(p.sigma) && p.sigma > 0.0, "decay point sigma must be > 0");
    times.push_back(p.t_s);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  detail::require(times.size() >= 3, "contrast decay fit needs at least 3 distinct times");

  // Coarse pass to locate the posterior support, then a fine pass over it.
  Grid coarse = evaluate(points, prior.lower, prior.upper, 2000);
  const double coarse_peak = *std::max_element(coarse.logp.begin(), coarse.logp.end());
  std::size_t first = coarse.x.size(), last = 0;
  for (std::size_t i = 0; i < coarse.x.size(); ++i)
    if (coarse.logp[i] - coarse_peak > -40.0) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  const double lo = std::max(prior.lower, coarse.x[first] - 1.5 * coarse.step);
  const double hi = std::min(prior.upper, coarse.x[last] + 1.5 * coarse.step);
  Grid fine = evaluate(points, lo, hi, 4000);

  const auto peak_it = std::max_element(fine.logp.begin(), fine.logp.end());
  const double peak = *peak_it;
  std::vector<double> mass(fine.x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    mass[i] = std::exp(fine.logp[i] - peak);
    total += mass[i];
  }
  // Cell i covers [lo + i*step, lo + (i+1)*step]; interpolate the CDF linearly inside it.
  const auto quantile = [&](double q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      const double next = acc + mass[i] / total;
      if (next >= q) {
        const double frac = mass[i] > 0.0 ? (q - acc) / (mass[i] / total) : 0.5;
        return lo + (static_cast<double>(i) + std::clamp(frac, 0.0, 1.0)) * fine.step;
      }
      acc = next;
    }
    return hi;
  };

  // Refine the mode inside its cell neighbourhood.
  const std::size_t k = static_cast<std::size_t>(peak_it - fine.logp.begin());
  double a = std::max(lo, fine.x[k] - fine.step), b = std::min(hi, fine.x[k] + fine.step);
  const auto log_post = [&](double t_c) { return conditional(points, t_c).log_post; };
  for (int i = 0; i < 100 && b - a > 1e-12; ++i) {
    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (log_post(m1) < log_post(m2))
      a = m1;
    else
      b = m2;
  }
  double mode = 0.5 * (a + b);
  if (log_post(mode) < log_post(fine.x[k]))
    mode = fine.x[k];

  CoherenceFit fit;
  fit.prior_bounds = prior;
  fit.t_c = mode;
  fit.c0 = conditional(points, mode).c0;
  fit.ci_lower = std::min(quantile(0.5 - 0.6826894921370859 / 2.0), mode);
  fit.ci_upper = std::max(quantile(0.5 + 0.6826894921370859 / 2.0), mode);
  fit.ci_lower = std::max(fit.ci_lower, prior.lower);
  fit.ci_upper = std::min(fit.ci_upper, prior.upper);
  return fit;
}

} // namespace corrspec
