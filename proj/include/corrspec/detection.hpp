#pragma once

// Adaptive Bayesian discrimination of the four joint clock states of two atoms
// from repeated, individually weak fluorescence cycles on a logic ion.
//
// The default likelihoods are a calibrated stand-in: two cycle types, each
// mapping one atom strongly and the other weakly onto the logic ion, with
// Poisson photon counts. They are tuned so that a 0.99 posterior is reached in
// about 30 cycles (about 50 ms) and are fully overridable.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "corrspec/rng.hpp"

namespace corrspec {

/// Joint state (atom 1, atom 2); d = ground, u = excited.
enum class JointState : std::uint8_t { dd = 0, du = 1, ud = 2, uu = 3 };

inline constexpr std::size_t kJointStates = 4;

std::string_view to_string(JointState state);
JointState joint_state(bool excited_1, bool excited_2);

struct MappingParams {
  double bright_counts = 2.0; ///< mean counts per cycle when the mapping lights the logic ion
  double dark_counts = 0.5;   ///< background mean counts per cycle
  double strong_weight = 0.8; ///< mapping probability of the favoured atom
  double weak_weight = 0.3;   ///< mapping probability of the other atom
};

struct DetectionModel {
  /// mean_counts[cycle][state]
  std::vector<std::array<double, kJointStates>> mean_counts;
  double cycle_duration_s = 1.67e-3;
  double threshold = 0.99;
  std::uint32_t max_cycles = 200;

  std::size_t cycle_types() const { return mean_counts.size(); }

  /// Two cycle types built from `params`; cycle 0 favours atom 1, cycle 1 atom 2.
  static DetectionModel from_mapping(const MappingParams &params);
  static DetectionModel calibrated_default();
};

void validate(const DetectionModel &model);

struct PosteriorState {
  std::array<double, kJointStates> probs{0.25, 0.25, 0.25, 0.25};

  static PosteriorState uniform();
  /// `mass` on the previously declared state, the remainder spread evenly.
  static PosteriorState carry_over(JointState previous, double mass = 0.9);

  JointState most_likely() const;
  double max_probability() const;
};

std::uint32_t simulate_cycle(JointState true_state, std::size_t cycle, const DetectionModel &model,
                             Stream &rng);

/// Multiply by the Poisson likelihood of `counts` and renormalise, in log space.
/// Throws ModelMisconfigured if no state with prior mass can produce `counts`.
PosteriorState bayes_update(const PosteriorState &posterior, std::uint32_t counts,
                            std::size_t cycle, const DetectionModel &model);

/// Mutual information (nats) between the joint state and the next count of `cycle`.
double expected_information_gain(const PosteriorState &posterior, std::size_t cycle,
                                 const DetectionModel &model);

/// Cycle type with the largest expected information gain; ties go to the lower index.
std::size_t choose_cycle(const PosteriorState &posterior, const DetectionModel &model);

struct DetectionResult {
  JointState declared = JointState::dd;
  std::uint32_t cycles_used = 0;
  bool converged = false;
  PosteriorState posterior;
};

DetectionResult detect_joint_state(JointState true_state, const DetectionModel &model,
                                   Stream &rng, const PosteriorState &prior = {});

struct DetectionBenchmark {
  std::uint64_t trials = 0;
  double mean_cycles = 0.0;
  double mean_duration_s = 0.0;
  double misidentification_rate = 0.0;
  double convergence_rate = 0.0;
  /// histogram[k] = trials that stopped after k cycles, k in [0, max_cycles].
  std::vector<std::uint64_t> histogram;
};

/// Trials with true states drawn uniformly and a uniform prior.
DetectionBenchmark run_detection_benchmark(const DetectionModel &model, std::uint64_t trials,
                                           std::uint64_t seed, unsigned workers = 1);

} // namespace corrspec
