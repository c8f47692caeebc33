#include "corrspec/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corrspec/errors.hpp"

namespace corrspec {

using detail::fail;
using detail::require;

void validate(const ClockSpec &spec) {
  if (!(std::isfinite(spec.nu_hz) && spec.nu_hz > 0.0))
    fail("clock.nu_hz must be > 0");
  if (!(std::isfinite(spec.t_prime_s) && spec.t_prime_s > 0.0))
    fail("clock.t_prime_s must be > 0");
  if (!(spec.detection_fidelity >= 0.5 && spec.detection_fidelity <= 1.0))
    fail("clock.detection_fidelity must lie in [0.5, 1]");
  if (!(std::isfinite(spec.overhead_s) && spec.overhead_s >= 0.0))
    fail("clock.overhead_s must be >= 0");
  if (!(std::isfinite(spec.session_overhead_s) && spec.session_overhead_s >= 0.0))
    fail("clock.session_overhead_s must be >= 0");
}

double ContrastModel::at(double t) const { return c0 * std::exp(-t / t_c); }

void validate(const ContrastModel &model) {
  if (!(model.c0 >= 0.0 && model.c0 <= 0.5))
    fail("contrast c0 must lie in [0, 0.5]");
  if (!(std::isfinite(model.t_c) && model.t_c > 0.0))
    fail("coherence time must be > 0");
}

double ramsey_transition_probability(double dphi) {
  require(std::isfinite(dphi), "phase must be finite");
  return 0.5 * (1.0 + std::cos(dphi));
}

double joint_correlation_probability(PhasePair phases) {
  require(std::isfinite(phases.dphi_1) && std::isfinite(phases.dphi_2),
          "phases must be finite");
  const double p = (2.0 + std::cos(phases.dphi_1 - phases.dphi_2) +
                    std::cos(phases.dphi_1 + phases.dphi_2)) /
                   4.0;
  return std::clamp(p, 0.0, 1.0);
}

double averaged_correlation(double delta_phi, double contrast) {
  require(std::isfinite(delta_phi), "phase must be finite");
  require(contrast >= 0.0 && contrast <= 0.5, "contrast must lie in [0, 0.5]");
  return 0.5 + 0.5 * contrast * std::cos(delta_phi);
}

double lifetime_contrast(double t, const ClockSpec &spec) {
  require(std::isfinite(t) && t >= 0.0, "free-evolution time must be >= 0");
  return 0.5 * std::exp(-t / spec.t_prime_s);
}

double instability(const ClockSpec &spec, double contrast, double t, double tau) {
  require(t > 0.0 && tau > 0.0, "free-evolution and averaging times must be > 0");
  require(std::isfinite(contrast), "contrast must be finite");
  if (contrast <= 0.0)
    throw Unmeasurable("zero contrast carries no phase information");
  return 1.0 / (kTwoPi * spec.nu_hz * contrast * std::sqrt(t * tau));
}

double lifetime_limited_instability(const ClockSpec &spec, double t, double tau) {
  return instability(spec, lifetime_contrast(t, spec), t, tau);
}

double scan_instability(const ClockSpec &spec, double contrast, double t, double tau) {
  return instability(spec, contrast, t, tau) * kUniformPhasePenalty /
         std::sqrt(duty_cycle_factor(t, spec));
}

double optimal_probe_time(const ClockSpec &spec) { return 0.5 * spec.t_prime_s; }

double q_coherence(const ClockSpec &spec, double t_c) {
  require(t_c > 0.0, "coherence time must be > 0");
  return std::numbers::pi * spec.nu_hz * t_c;
}

double q_spectroscopic(const ClockSpec &spec, double t) {
  require(t > 0.0, "free-evolution time must be > 0");
  return 2.0 * spec.nu_hz * t;
}

double duty_cycle_factor(double t, const ClockSpec &spec) {
  require(t > 0.0, "free-evolution time must be > 0");
  return t / (t + spec.overhead_s);
}

double detection_contrast_factor(double fidelity_1, double fidelity_2) {
  require(fidelity_1 >= 0.5 && fidelity_1 <= 1.0 && fidelity_2 >= 0.5 && fidelity_2 <= 1.0,
          "detection fidelity must lie in [0.5, 1]");
  return (2.0 * fidelity_1 - 1.0) * (2.0 * fidelity_2 - 1.0);
}

} // namespace corrspec
