#pragma once

// Recovery of physical quantities from correlation data: maximum-likelihood
// fringe fits, a Bayesian contrast-decay fit, a weighted phase-drift fit and
// frequency-stability statistics.

#include <cstddef>
#include <span>
#include <vector>

#include "corrspec/core.hpp"
#include "corrspec/protocol.hpp"

namespace corrspec {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double x) const { return lower <= x && x <= upper; }
  double width() const { return upper - lower; }
};

struct FringeFit {
  double contrast = 0.0;
  /// Fringe phase in [0, 2pi); the model is 1/2 + (C/2) cos(delta_phi_z + phase0).
  double phase0 = 0.0;
  double log_likelihood = 0.0;
  Interval contrast_ci;
  /// Expressed around phase0, so it may extend outside [0, 2pi).
  Interval phase_ci;
  bool phase_identifiable = true;

  /// Larger of the two contrast interval half-widths.
  double contrast_sigma() const;
  /// Mean of the two phase interval half-widths; infinite when unidentifiable.
  double phase_sigma() const;
};

/// Binomial log-likelihood of the fringe model at (contrast, phase0).
double fringe_log_likelihood(const FringeDataset &data, double contrast, double phase0);

/// Maximum-likelihood fit with profile-likelihood intervals at delta logL = 1/2.
/// Needs at least 4 points spanning more than pi.
FringeFit fit_fringe_mle(const FringeDataset &data);

struct DecayPoint {
  double t_s = 0.0;
  double contrast = 0.0;
  double sigma = 0.0;
};

DecayPoint decay_point(double t_s, const FringeFit &fit);

struct CoherenceFit {
  double t_c = 0.0;      ///< posterior mode
  double ci_lower = 0.0; ///< 16th percentile, widened if needed to include the mode
  double ci_upper = 0.0; ///< 84th percentile, widened if needed to include the mode
  Interval prior_bounds;
  double c0 = 0.0; ///< conditional best initial contrast at t_c
};

/// Reference prior support for the coherence time, seconds.
inline constexpr Interval kCoherencePrior{0.0, 25.0};

/// Bayesian fit of C(t) = c0 exp(-t/t_c): Gaussian errors per point, uniform
/// prior on t_c over `prior`, c0 marginalised over a uniform prior on [0, 1/2].
CoherenceFit fit_contrast_decay(std::span<const DecayPoint> points, Interval prior = kCoherencePrior);

/// Unnormalised log posterior of t_c used by fit_contrast_decay.
double contrast_decay_log_posterior(std::span<const DecayPoint> points, double t_c);

struct PhasePoint {
  double t_s = 0.0;
  double phase = 0.0;
  double sigma = 0.0;
};

struct DriftFit {
  double slope = 0.0;     ///< rad/s
  double slope_err = 0.0; ///< rad/s
  double intercept = 0.0; ///< rad
  double intercept_err = 0.0;
  double fractional_shift = 0.0;     ///< slope / (2 pi nu)
  double fractional_shift_err = 0.0; ///< slope_err / (2 pi nu)
};

/// Weighted least-squares line through unwrapped phases.
DriftFit fit_phase_drift(std::span<const PhasePoint> points, const ClockSpec &spec);

/// Phase slope (rad/s) produced by a fractional frequency difference.
double drift_slope_for_shift(double fractional_shift, const ClockSpec &spec);

/// Remove 2pi jumps: each value is moved to within pi of its predecessor, and
/// the first value is mapped into (-pi, pi].
std::vector<double> unwrap_phases(std::span<const double> phases);

/// Wrap into [0, 2pi).
double wrap_phase(double phase);

/// sigma * sqrt(duration / 1 s): the 1 s equivalent of a white-noise-limited
/// uncertainty reached after `duration` seconds.
double extrapolate_sigma1s(double sigma, double duration_s);

/// Fractional frequency uncertainty from a phase uncertainty after free evolution t.
double fractional_uncertainty_from_phase(double phase_sigma, double t, const ClockSpec &spec);

struct AllanPoint {
  double tau_s = 0.0;
  double sigma_y = 0.0;
  std::size_t terms = 0;
};

/// Overlapping Allan deviation at tau = 2^k * sample_period for every k with
/// at least two averaging windows available.
std::vector<AllanPoint> allan_deviation(std::span<const double> y, double sample_period_s);

} // namespace corrspec
