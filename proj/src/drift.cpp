#include <cmath>
#include <numbers>
#include <vector>

#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"

namespace corrspec {

std::vector<double> unwrap_phases(std::span<const double> phases) {
  std::vector<double> out;
  out.reserve(phases.size());
  for (double phi : phases) {
    detail::require(std::isfinite(phi), "phase must be finite");
    if (out.empty()) {
      out.push_back(std::remainder(phi, kTwoPi));
      continue;
    }
    const double prev = out.back();
    out.push_back(prev + std::remainder(phi - prev, kTwoPi));
  }
  return out;
}

DriftFit fit_phase_drift(std::span<const PhasePoint> points, const ClockSpec &spec) {
  detail::require(points.size() >= 2, "drift fit needs at least 2 points");
  double sw = 0.0, st = 0.0, sp = 0.0, stt = 0.0, stp = 0.0;
  for (const auto &p : points) {
    detail::require(std::isfinite(p.t_s) && std::isfinite(p.phase), "drift points must be finite");
    detail::require(std::isfinite(p.sigma) && p.sigma > 0.0, "drift point sigma must be > 0");
    const double w = 1.0 / (p.sigma * p.sigma);
    sw += w;
    st += w * p.t_s;
    sp += w * p.phase;
    stt += w * p.t_s * p.t_s;
    stp += w * p.t_s * p.phase;
  }
  const double det = sw * stt - st * st;
  if (!(det > 1e-12 * sw * stt))
    throw InvalidArgument("drift fit design is singular (all points share one time)");

  DriftFit fit;
  fit.slope = (sw * stp - st * sp) / det;
  fit.intercept = (stt * sp - st * stp) / det;
  fit.slope_err = std::sqrt(sw / det);
  fit.intercept_err = std::sqrt(stt / det);
  const double scale = kTwoPi * spec.nu_hz;
  fit.fractional_shift = fit.slope / scale;
  fit.fractional_shift_err = fit.slope_err / scale;
  return fit;
}

double drift_slope_for_shift(double fractional_shift, const ClockSpec &spec) {
  return kTwoPi * spec.nu_hz * fractional_shift;
}

double extrapolate_sigma1s(double sigma, double duration_s) {
  detail::require(duration_s > 0.0, "duration must be > 0");
  return sigma * std::sqrt(duration_s);
}

double fractional_uncertainty_from_phase(double phase_sigma, double t, const ClockSpec &spec) {
  detail::require(t > 0.0, "free-evolution time must be > 0");
  return phase_sigma / (kTwoPi * spec.nu_hz * t);
}

} // namespace corrspec
