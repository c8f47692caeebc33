#pragma once

// Closed-form relations for correlation Ramsey spectroscopy of a pair of
// clock atoms. Everything here is pure and reentrant.

#include <numbers>

namespace corrspec {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Parameters of one clock species and its interrogation dead time.
struct ClockSpec {
  double nu_hz = 1.121e15;           ///< transition frequency
  double t_prime_s = 20.6;           ///< excited-state lifetime
  double detection_fidelity = 0.99;  ///< per-atom readout fidelity
  double overhead_s = 0.1;           ///< dead time per probe in the duty-cycle model
  double session_overhead_s = 0.753; ///< dead time per probe used for session bookkeeping
};

/// Throws InvalidArgument naming the first violated field.
void validate(const ClockSpec &spec);

/// Laser-minus-atom phases of the two atoms at the end of free evolution.
struct PhasePair {
  double dphi_1 = 0.0;
  double dphi_2 = 0.0;
};

/// Exponential fringe-contrast decay C(t) = c0 exp(-t / t_c).
struct ContrastModel {
  double c0 = 0.5;
  double t_c = 20.6;

  double at(double t) const;
};

void validate(const ContrastModel &model);

/// Single-atom Ramsey transition probability (1 + cos dphi) / 2.
double ramsey_transition_probability(double dphi);

/// Probability that both atoms flip or both stay, for a known laser phase.
double joint_correlation_probability(PhasePair phases);

/// Correlation probability after averaging over a uniformly random common
/// laser phase: 1/2 + (contrast/2) cos(delta_phi). contrast must be in [0, 1/2].
double averaged_correlation(double delta_phi, double contrast);

/// Contrast limited by spontaneous decay of the upper clock state.
double lifetime_contrast(double t, const ClockSpec &spec);

/// Fractional frequency uncertainty of a quadrature-biased correlation
/// measurement, (2 pi nu C sqrt(t tau))^-1. Throws Unmeasurable for C <= 0.
double instability(const ClockSpec &spec, double contrast, double t, double tau);

/// instability() evaluated with lifetime_contrast(t).
double lifetime_limited_instability(const ClockSpec &spec, double t, double tau);

/// Fisher-information penalty when the differential phase is spread uniformly
/// over the fringe instead of held at quadrature.
inline constexpr double kUniformPhasePenalty = std::numbers::sqrt2;

/// Instability for a phase scan spread over [0, 2pi) with per-probe dead time:
/// instability() * sqrt(2) / sqrt(duty_cycle_factor).
double scan_instability(const ClockSpec &spec, double contrast, double t, double tau);

/// Free-evolution time minimising lifetime_limited_instability: t_prime / 2.
double optimal_probe_time(const ClockSpec &spec);

/// Coherence-based quality factor pi nu t_c.
double q_coherence(const ClockSpec &spec, double t_c);

/// Ramsey-linewidth quality factor 2 nu t.
double q_spectroscopic(const ClockSpec &spec, double t);

/// Fraction of wall-clock time spent in free evolution, t / (t + overhead).
double duty_cycle_factor(double t, const ClockSpec &spec);

/// Contrast scaling from independent symmetric readout errors on both atoms.
double detection_contrast_factor(double fidelity_1, double fidelity_2);

} // namespace corrspec
