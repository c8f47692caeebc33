#include "corrspec/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "corrspec/errors.hpp"
#include "parallel.hpp"

namespace corrspec {

using detail::fail;
using detail::require;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double poisson_log_pmf(std::uint32_t n, double mean) {
  if (mean == 0.0)
    return n == 0 ? 0.0 : kNegInf;
  const double k = static_cast<double>(n);
  return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

void require_cycle(std::size_t cycle, const DetectionModel &model) {
  if (cycle >= model.cycle_types())
    fail("unknown detection cycle type " + std::to_string(cycle));
}

} // namespace

std::string_view to_string(JointState state) {
  switch (state) {
  case JointState::dd: return "dd";
  case JointState::du: return "du";
  case JointState::ud: return "ud";
  case JointState::uu: return "uu";
  }
  return "?";
}

JointState joint_state(bool excited_1, bool excited_2) {
  return static_cast<JointState>((excited_1 ? 2 : 0) | (excited_2 ? 1 : 0));
}

DetectionModel DetectionModel::from_mapping(const MappingParams &params) {
  require(params.bright_counts >= 0.0 && params.dark_counts >= 0.0,
          "detection counts must be >= 0");
  require(params.strong_weight >= 0.0 && params.strong_weight <= 1.0 &&
              params.weak_weight >= 0.0 && params.weak_weight <= 1.0,
          "mapping weights must lie in [0, 1]");
  DetectionModel model;
  const std::array<std::array<double, 2>, 2> weights{
      std::array<double, 2>{params.strong_weight, params.weak_weight},
      std::array<double, 2>{params.weak_weight, params.strong_weight}};
  for (const auto &w : weights) {
    std::array<double, kJointStates> means{};
    for (std::size_t s = 0; s < kJointStates; ++s) {
      const bool e1 = (s & 2u) != 0, e2 = (s & 1u) != 0;
      const double mapped = 1.0 - (1.0 - (e1 ? w[0] : 0.0)) * (1.0 - (e2 ? w[1] : 0.0));
      means[s] = params.dark_counts + (params.bright_counts - params.dark_counts) * mapped;
    }
    model.mean_counts.push_back(means);
  }
  return model;
}

DetectionModel DetectionModel::calibrated_default() { return from_mapping(MappingParams{}); }

void validate(const DetectionModel &model) {
  if (model.mean_counts.empty())
    fail("detection.mean_counts needs at least one cycle type");
  for (const auto &row : model.mean_counts)
    for (double m : row)
      if (!(std::isfinite(m) && m >= 0.0))
        fail("detection.mean_counts entries must be finite and >= 0");
  if (!(model.threshold > 0.5 && model.threshold < 1.0))
    fail("detection.threshold must lie in (0.5, 1)");
  if (model.max_cycles < 1)
    fail("detection.max_cycles must be >= 1");
  if (!(model.cycle_duration_s > 0.0))
    fail("detection.cycle_duration_s must be > 0");
}

PosteriorState PosteriorState::uniform() { return {}; }

PosteriorState PosteriorState::carry_over(JointState previous, double mass) {
  require(mass >= 0.0 && mass <= 1.0, "carry-over mass must lie in [0, 1]");
  PosteriorState out;
  const double rest = (1.0 - mass) / static_cast<double>(kJointStates - 1);
  out.probs.fill(rest);
  out.probs[static_cast<std::size_t>(previous)] = mass;
  return out;
}

JointState PosteriorState::most_likely() const {
  return static_cast<JointState>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double PosteriorState::max_probability() const {
  return *std::max_element(probs.begin(), probs.end());
}

std::uint32_t simulate_cycle(JointState true_state, std::size_t cycle, const DetectionModel &model,
                             Stream &rng) {
  require_cycle(cycle, model);
  const double mean = model.mean_counts[cycle][static_cast<std::size_t>(true_state)];
  if (mean == 0.0)
    return 0;
  std::poisson_distribution<std::uint32_t> draw(mean);
  return draw(rng);
}

PosteriorState bayes_update(const PosteriorState &posterior, std::uint32_t counts,
                            std::size_t cycle, const DetectionModel &model) {
  require_cycle(cycle, model);
  std::array<double, kJointStates> log_post{};
  double peak = kNegInf;
  for (std::size_t s = 0; s < kJointStates; ++s) {
    const double prior = posterior.probs[s];
    log_post[s] = prior > 0.0 ? std::log(prior) + poisson_log_pmf(counts, model.mean_counts[cycle][s])
                              : kNegInf;
    peak = std::max(peak, log_post[s]);
  }
  if (peak == kNegInf)
    throw ModelMisconfigured("no joint state can produce " + std::to_string(counts) +
                             " counts in cycle type " + std::to_string(cycle));
  PosteriorState out;
  double total = 0.0;
  for (std::size_t s = 0; s < kJointStates; ++s) {
    out.probs[s] = std::exp(log_post[s] - peak);
    total += out.probs[s];
  }
  for (double &p : out.probs)
    p /= total;
  return out;
}

double expected_information_gain(const PosteriorState &posterior, std::size_t cycle,
                                 const DetectionModel &model) {
  require_cycle(cycle, model);
  const auto &means = model.mean_counts[cycle];
  const double top = *std::max_element(means.begin(), means.end());
  const auto n_max = static_cast<std::uint32_t>(std::ceil(top + 12.0 * std::sqrt(top) + 25.0));
  double gain = 0.0;
  for (std::uint32_t n = 0; n <= n_max; ++n) {
    std::array<double, kJointStates> pmf{};
    double mixture = 0.0;
    for (std::size_t s = 0; s < kJointStates; ++s) {
      pmf[s] = std::exp(poisson_log_pmf(n, means[s]));
      mixture += posterior.probs[s] * pmf[s];
    }
    if (mixture <= 0.0)
      continue;
    for (std::size_t s = 0; s < kJointStates; ++s)
      if (posterior.probs[s] > 0.0 && pmf[s] > 0.0)
        gain += posterior.probs[s] * pmf[s] * std::log(pmf[s] / mixture);
  }
  return std::max(gain, 0.0);
}

std::size_t choose_cycle(const PosteriorState &posterior, const DetectionModel &model) {
  std::size_t best = 0;
  double best_gain = -1.0;
  for (std::size_t c = 0; c < model.cycle_types(); ++c) {
    const double g = expected_information_gain(posterior, c, model);
    if (g > best_gain) {
      best_gain = g;
      best = c;
    }
  }
  return best;
}

DetectionResult detect_joint_state(JointState true_state, const DetectionModel &model,
                                   Stream &rng, const PosteriorState &prior) {
  validate(model);
  DetectionResult result;
  result.posterior = prior;
  while (result.cycles_used < model.max_cycles) {
    const std::size_t cycle = choose_cycle(result.posterior, model);
    const std::uint32_t counts = simulate_cycle(true_state, cycle, model, rng);
    result.posterior = bayes_update(result.posterior, counts, cycle, model);
    ++result.cycles_used;
    if (result.posterior.max_probability() >= model.threshold) {
      result.converged = true;
      break;
    }
  }
  result.declared = result.posterior.most_likely();
  return result;
}

DetectionBenchmark run_detection_benchmark(const DetectionModel &model, std::uint64_t trials,
                                           std::uint64_t seed, unsigned workers) {
  validate(model);
  require(trials > 0, "benchmark needs at least one trial");
  struct Trial {
    std::uint32_t cycles;
    bool wrong;
    bool converged;
  };
  std::vector<Trial> results(trials);
  const std::uint32_t tag = stream_tag(StreamModule::detection);
  detail::parallel_for(trials, workers, [&](std::size_t i) {
    Stream rng(seed, tag, i);
    const auto truth = static_cast<JointState>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(rng.uniform() * kJointStates), 3));
    const auto r = detect_joint_state(truth, model, rng);
    results[i] = {r.cycles_used, r.declared != truth, r.converged};
  });

  DetectionBenchmark out;
  out.trials = trials;
  out.histogram.assign(model.max_cycles + 1, 0);
  double cycles = 0.0, wrong = 0.0, converged = 0.0;
  for (const auto &r : results) {
    cycles += r.cycles;
    wrong += r.wrong ? 1.0 : 0.0;
    converged += r.converged ? 1.0 : 0.0;
    ++out.histogram[r.cycles];
  }
  const double n = static_cast<double>(trials);
  out.mean_cycles = cycles / n;
  out.mean_duration_s = out.mean_cycles * model.cycle_duration_s;
  out.misidentification_rate = wrong / n;
  out.convergence_rate = converged / n;
  return out;
}

} // namespace corrspec
