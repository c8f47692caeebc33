#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"

namespace corrspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxAmplitude = 0.25; // C/2 at C = 1/2
constexpr int kContrastGrid = 50;
constexpr int kPhaseGrid = 64;

// Fringe data in the linear parameterisation
//   P_j = 1/2 + a cos x_j + b sin x_j,  a = (C/2) cos phase0,  b = -(C/2) sin phase0,
// in which the log-likelihood is concave.
class FringeLikelihood {
public:
  explicit FringeLikelihood(const FringeDataset &data) {
    for (const auto &p : data.points) {
      cos_.push_back(std::cos(p.delta_phi_z));
      sin_.push_back(std::sin(p.delta_phi_z));
      hits_.push_back(static_cast<double>(p.n_correlated));
      misses_.push_back(static_cast<double>(p.n_total - p.n_correlated));
      const double n = static_cast<double>(p.n_total);
      log_binom_ += std::lgamma(n + 1.0) - std::lgamma(hits_.back() + 1.0) -
                    std::lgamma(misses_.back() + 1.0);
    }
  }

  double constant() const { return log_binom_; }

  // Log-likelihood without the binomial-coefficient constant; -inf off-domain.
  double operator()(double a, double b) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < cos_.size(); ++j) {
      const double p = 0.5 + a * cos_[j] + b * sin_[j];
      if (!(p > 0.0 && p < 1.0))
        return -kInf;
      if (hits_[j] > 0.0)
        sum += hits_[j] * std::log(p);
      if (misses_[j] > 0.0)
        sum += misses_[j] * std::log1p(-p);
    }
    return sum;
  }

  double polar(double contrast, double phase0) const {
    return (*this)(0.5 * contrast * std::cos(phase0), -0.5 * contrast * std::sin(phase0));
  }

  // Newton direction; returns false if the curvature matrix is singular.
  bool newton_direction(double a, double b, double &da, double &db, double &ga,
                        double &gb) const {
    double haa = 0.0, hab = 0.0, hbb = 0.0;
    ga = gb = 0.0;
    for (std::size_t j = 0; j < cos_.size(); ++j) {
      const double p = 0.5 + a * cos_[j] + b * sin_[j];
      const double w = hits_[j] / p - misses_[j] / (1.0 - p);
      const double h = hits_[j] / (p * p) + misses_[j] / ((1.0 - p) * (1.0 - p));
      ga += w * cos_[j];
      gb += w * sin_[j];
      haa += h * cos_[j] * cos_[j];
      hab += h * cos_[j] * sin_[j];
      hbb += h * sin_[j] * sin_[j];
    }
    const double det = haa * hbb - hab * hab;
    if (!(det > 1e-12 * std::max(1.0, haa * hbb)))
      return false;
    da = (hbb * ga - hab * gb) / det;
    db = (haa * gb - hab * ga) / det;
    return true;
  }

  // d/dC of the log-likelihood along a fixed phase.
  double contrast_derivative(double contrast, double phase0) const {
    const double c = std::cos(phase0), s = std::sin(phase0);
    double d = 0.0;
    for (std::size_t j = 0; j < cos_.size(); ++j) {
      const double shape = 0.5 * (cos_[j] * c - sin_[j] * s);
      const double p = 0.5 + contrast * shape;
      d += (hits_[j] / p - misses_[j] / (1.0 - p)) * shape;
    }
    return d;
  }

private:
  std::vector<double> cos_, sin_, hits_, misses_;
  double log_binom_ = 0.0;
};

// Golden-section maximisation of f on [lo, hi].
template <class F> double golden_max(F &&f, double lo, double hi, double tol = 1e-11) {
  constexpr double kRatio = 0.6180339887498949;
  double x1 = hi - kRatio * (hi - lo), x2 = lo + kRatio * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kRatio * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kRatio * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

struct PhaseMax {
  double phase;
  double value;
};

// Best phase at fixed contrast: coarse scan then golden refinement.
PhaseMax maximise_phase(const FringeLikelihood &ll, double contrast, int scan = kPhaseGrid) {
  double best_phase = 0.0, best = -kInf;
  const double step = kTwoPi / scan;
  for (int m = 0; m < scan; ++m) {
    const double v = ll.polar(contrast, m * step);
    if (v > best) {
      best = v;
      best_phase = m * step;
    }
  }
  const auto f = [&](double phi) { return ll.polar(contrast, phi); };
  const double phi = golden_max(f, best_phase - step, best_phase + step);
  const double v = f(phi);
  return v >= best ? PhaseMax{phi, v} : PhaseMax{best_phase, best};
}

// Best contrast in [0, 1/2] at fixed phase (concave in C).
double maximise_contrast(const FringeLikelihood &ll, double phase0) {
  if (ll.contrast_derivative(0.0, phase0) <= 0.0)
    return 0.0;
  if (ll.contrast_derivative(0.5, phase0) >= 0.0)
    return 0.5;
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 80 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ll.contrast_derivative(mid, phase0) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Root of g(x) = target between lo (g >= target) and hi (g < target).
template <class G> double bisect_level(G &&g, double target, double inside, double outside) {
  for (int i = 0; i < 100 && std::abs(outside - inside) > 1e-12; ++i) {
    const double mid = 0.5 * (inside + outside);
    (g(mid) >= target ? inside : outside) = mid;
  }
  return 0.5 * (inside + outside);
}

} // namespace

double FringeFit::contrast_sigma() const {
  return std::max(contrast_ci.upper - contrast, contrast - contrast_ci.lower);
}

double FringeFit::phase_sigma() const {
  return phase_identifiable ? 0.5 * phase_ci.width() : kInf;
}

double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  if (w < 0.0)
    w += kTwoPi;
  return w >= kTwoPi ? 0.0 : w;
}

double fringe_log_likelihood(const FringeDataset &data, double contrast, double phase0) {
  validate(data);
  detail::require(contrast >= 0.0 && contrast <= 0.5, "contrast must lie in [0, 0.5]");
  const FringeLikelihood ll(data);
  return ll.polar(contrast, phase0) + ll.constant();
}

FringeFit fit_fringe_mle(const FringeDataset &data) {
  validate(data);
  detail::require(data.points.size() >= 4, "fringe fit needs at least 4 points");
  detail::require(data.points.back().delta_phi_z - data.points.front().delta_phi_z >
                      std::numbers::pi,
                  "fringe fit needs points spanning more than pi");
  const FringeLikelihood ll(data);

  // Deterministic grid seed over [0, 1/2] x [0, 2pi).
  double seed_c = 0.0, seed_phi = 0.0, seed_val = -kInf;
  for (int i = 0; i < kContrastGrid; ++i) {
    const double c = 0.5 * i / (kContrastGrid - 1);
    for (int m = 0; m < kPhaseGrid; ++m) {
      const double phi = kTwoPi * m / kPhaseGrid;
      const double v = ll.polar(c, phi);
      if (v > seed_val) {
        seed_val = v;
        seed_c = c;
        seed_phi = phi;
      }
    }
  }

  // Damped Newton in (a, b). The unconstrained optimum, when it lies inside
  // the disk C <= 1/2, is the constrained one; otherwise the optimum is on the rim.
  double a = 0.5 * seed_c * std::cos(seed_phi), b = -0.5 * seed_c * std::sin(seed_phi);
  double value = ll(a, b);
  bool interior = false;
  for (int iter = 0; iter < 200; ++iter) {
    double da, db, ga, gb;
    if (!ll.newton_direction(a, b, da, db, ga, gb)) {
      da = ga * 1e-6;
      db = gb * 1e-6;
    }
    double step = 1.0, next = -kInf;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      next = ll(a + step * da, b + step * db);
      if (next >= value)
        break;
    }
    if (!(next >= value)) {
      interior = std::hypot(a, b) <= kMaxAmplitude;
      break;
    }
    a += step * da;
    b += step * db;
    const double gain = next - value;
    value = next;
    if (std::hypot(step * da, step * db) < 1e-14 || gain < 1e-15) {
      interior = std::hypot(a, b) <= kMaxAmplitude;
      break;
    }
    if (std::hypot(a, b) > 4.0 * kMaxAmplitude)
      break;
  }

  FringeFit fit;
  if (interior) {
    fit.contrast = 2.0 * std::hypot(a, b);
    fit.phase0 = fit.contrast > 0.0 ? wrap_phase(std::atan2(-b, a)) : 0.0;
  } else {
    const PhaseMax rim = maximise_phase(ll, 0.5, 256);
    fit.contrast = 0.5;
    fit.phase0 = wrap_phase(rim.phase);
  }
  const double best = ll.polar(fit.contrast, fit.phase0);
  fit.log_likelihood = best + ll.constant();
  const double target = best - 0.5;

  // Contrast interval from the profile over phase.
  const auto contrast_profile = [&](double c) { return maximise_phase(ll, c).value; };
  fit.contrast_ci.lower =
      fit.contrast <= 0.0 || contrast_profile(0.0) >= target
          ? 0.0
          : bisect_level(contrast_profile, target, fit.contrast, 0.0);
  fit.contrast_ci.upper =
      fit.contrast >= 0.5 || contrast_profile(0.5) >= target
          ? 0.5
          : bisect_level(contrast_profile, target, fit.contrast, 0.5);

  // Phase interval from the profile over contrast.
  const double flat = ll.polar(0.0, 0.0);
  fit.phase_identifiable = fit.contrast > 0.0 && flat < target;
  if (!fit.phase_identifiable) {
    fit.phase_ci = {fit.phase0 - std::numbers::pi, fit.phase0 + std::numbers::pi};
    return fit;
  }
  const auto phase_profile = [&](double phi) {
    return ll.polar(maximise_contrast(ll, phi), phi);
  };
  const double scan_step = std::numbers::pi / 128.0;
  const auto edge = [&](double direction) {
    double inside = fit.phase0;
    for (int k = 1; k <= 128; ++k) {
      const double probe = fit.phase0 + direction * k * scan_step;
      if (phase_profile(probe) < target)
        return bisect_level(phase_profile, target, inside, probe);
      inside = probe;
    }
    return fit.phase0 + direction * std::numbers::pi;
  };
  fit.phase_ci = {edge(-1.0), edge(+1.0)};
  return fit;
}

} // namespace corrspec
