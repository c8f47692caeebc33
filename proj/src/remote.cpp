#include "corrspec/remote.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "corrspec/errors.hpp"
#include "parallel.hpp"

namespace corrspec {

using detail::fail;
using detail::require;

void validate(const RemoteConfig &config) {
  if (config.n_a < 1 || config.n_b < 1)
    fail("remote atom numbers must be >= 1");
  for (double v : {config.theta_a, config.theta_b, config.true_dphi_ab, config.prior_dphi_ab})
    if (!std::isfinite(v))
      fail("remote phases must be finite");
  if (!(std::isfinite(config.prior_var) && config.prior_var >= 0.0))
    fail("remote prior_var must be >= 0");
  if (!(std::isfinite(config.t_s) && config.t_s > 0.0))
    fail("remote t_s must be > 0");
  if (!(config.edge_epsilon >= 0.0 && config.edge_epsilon < 1.0))
    fail("remote edge_epsilon must lie in [0, 1)");
  if (!(config.ambiguity_sigmas > 0.0))
    fail("remote ambiguity_sigmas must be > 0");
  if (!(std::isfinite(config.laser_noise.magnitude_rad) && config.laser_noise.magnitude_rad >= 0.0))
    fail("remote laser noise magnitude must be >= 0");
  if (config.laser_noise.kind == LaserNoiseKind::flicker &&
      (config.laser_noise.flicker_components < 1 || config.laser_noise.flicker_components > 40))
    fail("remote flicker components must lie in [1, 40]");
}

std::string_view to_string(LaserNoiseKind kind) {
  switch (kind) {
  case LaserNoiseKind::uniform_random: return "uniform-random";
  case LaserNoiseKind::random_walk: return "random-walk";
  case LaserNoiseKind::flicker: return "flicker-approximation";
  }
  return "?";
}

LaserNoiseKind parse_laser_noise_kind(std::string_view name) {
  for (auto kind : {LaserNoiseKind::uniform_random, LaserNoiseKind::random_walk,
                    LaserNoiseKind::flicker})
    if (name == to_string(kind))
      return kind;
  fail("unknown laser noise kind '" + std::string(name) + "'");
}

double clock_transition_probability(double phi_x, double phi_l, double theta_x) {
  require(std::isfinite(phi_x) && std::isfinite(phi_l) && std::isfinite(theta_x),
          "phases must be finite");
  return 0.5 * (1.0 + std::cos(phi_x - phi_l - theta_x));
}

namespace {

constexpr double kProbabilitySlack = 1e-9;

double checked_arccos_argument(double p) {
  require(std::isfinite(p), "probability must be finite");
  if (p < -kProbabilitySlack || p > 1.0 + kProbabilitySlack)
    fail("probability outside [0, 1]");
  return std::clamp(2.0 * p - 1.0, -1.0, 1.0);
}

} // namespace

double invert_phase_difference(double p_a, double p_b, double theta_a, double theta_b) {
  return std::acos(checked_arccos_argument(p_a)) - std::acos(checked_arccos_argument(p_b)) +
         theta_a - theta_b;
}

std::pair<double, double> calibrate_quadrature(double prior_dphi_ab) {
  require(std::isfinite(prior_dphi_ab), "prior phase must be finite");
  return {prior_dphi_ab - 0.5 * std::numbers::pi, 0.0};
}

RemoteConfig calibrate_quadrature(const RemoteConfig &config) {
  RemoteConfig out = config;
  std::tie(out.theta_a, out.theta_b) = calibrate_quadrature(config.prior_dphi_ab);
  return out;
}

double projection_noise_variance(const RemoteConfig &config) {
  require(config.n_a >= 1 && config.n_b >= 1, "atom numbers must be >= 1");
  return 1.0 / static_cast<double>(config.n_a) + 1.0 / static_cast<double>(config.n_b);
}

BranchEstimate resolve_phase_difference(double p_hat_a, double p_hat_b,
                                        const RemoteConfig &config) {
  const double x_a = checked_arccos_argument(p_hat_a), x_b = checked_arccos_argument(p_hat_b);
  const double arc_a = std::acos(x_a), arc_b = std::acos(x_b);
  const double offset = config.theta_a - config.theta_b;
  const double predicted_sd = std::sqrt(projection_noise_variance(config));
  const double window =
      config.ambiguity_sigmas * std::sqrt(config.prior_var + predicted_sd * predicted_sd);

  std::array<double, 4> branch{};
  std::size_t best = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double sign_a = (i & 1u) ? -1.0 : 1.0, sign_b = (i & 2u) ? -1.0 : 1.0;
    const double raw = sign_a * arc_a - sign_b * arc_b + offset;
    branch[i] = config.prior_dphi_ab + std::remainder(raw - config.prior_dphi_ab, kTwoPi);
    if (std::abs(branch[i] - config.prior_dphi_ab) < std::abs(branch[best] - config.prior_dphi_ab))
      best = i;
  }

  BranchEstimate out;
  out.estimate = branch[best];
  for (std::size_t i = 0; i < 4 && !out.ambiguous; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      if (std::abs(branch[i] - config.prior_dphi_ab) < window &&
          std::abs(branch[j] - config.prior_dphi_ab) < window &&
          std::abs(branch[i] - branch[j]) > config.ambiguity_sigmas * predicted_sd) {
        out.ambiguous = true;
        break;
      }
  out.edge = std::abs(x_a) > 1.0 - config.edge_epsilon || std::abs(x_b) > 1.0 - config.edge_epsilon;
  return out;
}

RemoteShot simulate_remote_shot(const RemoteConfig &config, double phi_l_a, double phi_l_b,
                                Stream &rng) {
  // Only the difference of the clock phases is physical; clock B is the reference.
  const double phi_a = config.true_dphi_ab, phi_b = 0.0;
  const double p_a = clock_transition_probability(phi_a, phi_l_a, config.theta_a);
  const double p_b = clock_transition_probability(phi_b, phi_l_b, config.theta_b);
  std::binomial_distribution<std::uint64_t> count_a(config.n_a, p_a), count_b(config.n_b, p_b);

  RemoteShot shot;
  shot.phi_l_a = phi_l_a;
  shot.phi_l_b = phi_l_b;
  shot.p_hat_a = static_cast<double>(count_a(rng)) / static_cast<double>(config.n_a);
  shot.p_hat_b = static_cast<double>(count_b(rng)) / static_cast<double>(config.n_b);
  const BranchEstimate branch = resolve_phase_difference(shot.p_hat_a, shot.p_hat_b, config);
  shot.estimate = branch.estimate;
  shot.ambiguous = branch.ambiguous;
  shot.edge = branch.edge;
  return shot;
}

RemoteShot simulate_remote_shot(const RemoteConfig &config, Stream &rng) {
  const double phi_a = kTwoPi * rng.uniform();
  const double phi_b = config.synchronized ? phi_a : kTwoPi * rng.uniform();
  return simulate_remote_shot(config, phi_a, phi_b, rng);
}

namespace {

std::vector<double> laser_sequence(const LaserNoiseModel &noise, std::uint64_t shots,
                                   std::uint64_t seed, std::uint32_t clock) {
  const std::uint32_t tag = stream_tag(StreamModule::laser, clock);
  std::vector<double> phases(shots);
  if (noise.kind == LaserNoiseKind::uniform_random) {
    for (std::uint64_t k = 0; k < shots; ++k) {
      Stream rng(seed, tag, k);
      phases[k] = kTwoPi * rng.uniform();
    }
    return phases;
  }

  Stream rng(seed, tag, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double start = kTwoPi * rng.uniform();
  if (noise.kind == LaserNoiseKind::random_walk) {
    double phi = start;
    for (std::uint64_t k = 0; k < shots; ++k) {
      if (k > 0)
        phi += noise.magnitude_rad * gauss(rng);
      phases[k] = phi;
    }
    return phases;
  }

  // Mean-reverting walks with octave-spaced correlation times approximate a
  // 1/f spectrum between 1 and 2^(components-1) shots.
  const std::size_t components = noise.flicker_components;
  std::vector<double> state(components), keep(components);
  for (std::size_t j = 0; j < components; ++j) {
    keep[j] = std::exp(-1.0 / std::ldexp(1.0, static_cast<int>(j)));
    state[j] = noise.magnitude_rad * gauss(rng);
  }
  for (std::uint64_t k = 0; k < shots; ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < components; ++j) {
      if (k > 0)
        state[j] = keep[j] * state[j] +
                   std::sqrt(1.0 - keep[j] * keep[j]) * noise.magnitude_rad * gauss(rng);
      sum += state[j];
    }
    phases[k] = start + sum;
  }
  return phases;
}

} // namespace

std::pair<std::vector<double>, std::vector<double>>
laser_phase_sequences(const RemoteConfig &config, std::uint64_t shots, std::uint64_t seed) {
  auto a = laser_sequence(config.laser_noise, shots, seed, 0);
  auto b = config.synchronized ? a : laser_sequence(config.laser_noise, shots, seed, 1);
  return {std::move(a), std::move(b)};
}

RemoteRun run_remote_comparison(const RemoteConfig &config, std::uint64_t shots,
                                std::uint64_t seed, unsigned workers) {
  validate(config);
  require(shots >= 2, "remote comparison needs at least 2 shots");
  const auto [laser_a, laser_b] = laser_phase_sequences(config, shots, seed);

  RemoteRun run;
  run.shots.resize(shots);
  const std::uint32_t tag = stream_tag(StreamModule::remote);
  detail::parallel_for(shots, workers, [&](std::size_t k) {
    Stream rng(seed, tag, k);
    run.shots[k] = simulate_remote_shot(config, laser_a[k], laser_b[k], rng);
  });

  RemoteSummary &s = run.summary;
  s.shots = shots;
  s.predicted_variance = projection_noise_variance(config);
  double sum = 0.0, ambiguous = 0.0, edge = 0.0;
  for (const auto &shot : run.shots) {
    ambiguous += shot.ambiguous ? 1.0 : 0.0;
    edge += shot.edge ? 1.0 : 0.0;
    if (!shot.excluded()) {
      sum += shot.estimate;
      ++s.used;
    }
  }
  const double n = static_cast<double>(shots);
  s.ambiguity_rate = ambiguous / n;
  s.edge_rate = edge / n;
  s.excluded_rate = static_cast<double>(shots - s.used) / n;
  if (s.used > 0) {
    s.mean = sum / static_cast<double>(s.used);
    double ss = 0.0;
    for (const auto &shot : run.shots)
      if (!shot.excluded())
        ss += (shot.estimate - s.mean) * (shot.estimate - s.mean);
    s.variance = s.used > 1 ? ss / static_cast<double>(s.used - 1) : 0.0;
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.used));
    s.bias = s.mean - config.true_dphi_ab;
  }
  return run;
}

double comparison_instability(const RemoteConfig &config, double tau, const ClockSpec &spec) {
  require(config.t_s > 0.0 && tau > 0.0, "times must be > 0");
  return std::sqrt(projection_noise_variance(config)) /
         (kTwoPi * spec.nu_hz * std::sqrt(config.t_s * tau));
}

} // namespace corrspec
