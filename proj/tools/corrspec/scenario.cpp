#include "scenario.hpp"

#include <cmath>
#include <functional>
#include <map>

#include <yaml-cpp/yaml.h>

#include "support.hpp"

namespace cli {

namespace {

using Setter = std::function<void(const YAML::Node &, const std::string &)>;

template <class T> T scalar(const YAML::Node &node, const std::string &key) {
  if (!node.IsScalar())
    throw ConfigError("invalid value for '" + key + "': expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception &) {
    throw ConfigError("invalid value for '" + key + "'");
  }
}

template <class T> std::vector<T> sequence(const YAML::Node &node, const std::string &key) {
  if (!node.IsSequence())
    throw ConfigError("invalid value for '" + key + "': expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(scalar<T>(node[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

template <class T> Setter bind(T &field) {
  return [&field](const YAML::Node &n, const std::string &key) { field = scalar<T>(n, key); };
}
template <class T> Setter bind(std::optional<T> &field) {
  return [&field](const YAML::Node &n, const std::string &key) { field = scalar<T>(n, key); };
}
template <class T> Setter bind(std::vector<T> &field) {
  return [&field](const YAML::Node &n, const std::string &key) { field = sequence<T>(n, key); };
}

void apply(const YAML::Node &node, const std::string &section,
           const std::map<std::string, Setter> &setters) {
  if (!node.IsMap())
    throw ConfigError("invalid value for '" + section + "': expected a mapping");
  for (const auto &entry : node) {
    const auto name = entry.first.as<std::string>();
    const std::string key = section + "." + name;
    const auto it = setters.find(name);
    if (it == setters.end())
      throw ConfigError("unknown key '" + key + "'");
    it->second(entry.second, key);
  }
}

void require(bool ok, const std::string &key, const std::string &rule) {
  if (!ok)
    throw ConfigError(key + " " + rule);
}

} // namespace

Scenario load_scenario(const std::string &path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile &) {
    throw IoError("cannot read config file '" + path + "'");
  } catch (const YAML::Exception &e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  Scenario s;
  if (root.IsNull())
    return s;
  if (!root.IsMap())
    throw ConfigError("config root must be a mapping");

  auto &c = s.clock;
  auto &p = s.protocol;
  auto &e = s.estimation;
  auto &i = s.instability;
  auto &d = s.detection;
  auto &r = s.remote;
  const std::map<std::string, std::map<std::string, Setter>> sections{
      {"clock",
       {{"nu_hz", bind(c.nu_hz)},
        {"t_prime_s", bind(c.t_prime_s)},
        {"detection_fidelity", bind(c.detection_fidelity)},
        {"overhead_s", bind(c.overhead_s)},
        {"session_overhead_s", bind(c.session_overhead_s)}}},
      {"protocol",
       {{"ramsey_times_s", bind(p.ramsey_times_s)},
        {"probe_counts", bind(p.probe_counts)},
        {"phase_points", bind(p.phase_points)},
        {"phase_start_rad", bind(p.phase_start_rad)},
        {"phase_step_rad", bind(p.phase_step_rad)},
        {"y_offset_1", bind(p.y_offset_1)},
        {"y_offset_2", bind(p.y_offset_2)}}},
      {"estimation",
       {{"coherence_prior_lower_s", bind(e.coherence_prior_lower_s)},
        {"coherence_prior_upper_s", bind(e.coherence_prior_upper_s)}}},
      {"instability",
       {{"t_min_s", bind(i.t_min_s)},
        {"t_max_s", bind(i.t_max_s)},
        {"points", bind(i.points)},
        {"tau_s", bind(i.tau_s)},
        {"report_t_s", bind(i.report_t_s)},
        {"session_t_s", bind(i.session_t_s)},
        {"session_probes", bind(i.session_probes)},
        {"session_contrast", bind(i.session_contrast)}}},
      {"detection",
       {{"bright_counts", bind(d.bright_counts)},
        {"dark_counts", bind(d.dark_counts)},
        {"strong_weight", bind(d.strong_weight)},
        {"weak_weight", bind(d.weak_weight)},
        {"cycle_duration_s", bind(d.cycle_duration_s)},
        {"threshold", bind(d.threshold)},
        {"max_cycles", bind(d.max_cycles)},
        {"trials", bind(d.trials)}}},
      {"remote",
       {{"n_a", bind(r.n_a)},
        {"n_b", bind(r.n_b)},
        {"true_dphi_ab_rad", bind(r.true_dphi_ab_rad)},
        {"prior_dphi_ab_rad", bind(r.prior_dphi_ab_rad)},
        {"prior_var_rad2", bind(r.prior_var_rad2)},
        {"calibrate", bind(r.calibrate)},
        {"theta_a_rad", bind(r.theta_a_rad)},
        {"theta_b_rad", bind(r.theta_b_rad)},
        {"laser_noise", bind(r.laser_noise)},
        {"noise_magnitude_rad", bind(r.noise_magnitude_rad)},
        {"flicker_components", bind(r.flicker_components)},
        {"synchronized", bind(r.synchronized)},
        {"t_s", bind(r.t_s)},
        {"edge_epsilon", bind(r.edge_epsilon)},
        {"ambiguity_sigmas", bind(r.ambiguity_sigmas)},
        {"shots", bind(r.shots)},
        {"tau_s", bind(r.tau_s)}}},
  };

  for (const auto &entry : root) {
    const auto name = entry.first.as<std::string>();
    if (name == "seed") {
      s.seed = scalar<std::uint64_t>(entry.second, "seed");
      continue;
    }
    const auto it = sections.find(name);
    if (it == sections.end())
      throw ConfigError("unknown key '" + name + "'");
    apply(entry.second, name, it->second);
  }
  return s;
}

void validate(const Scenario &s) {
  check(csp_clock_spec_validate(&s.clock), "clock");

  const auto &p = s.protocol;
  require(!p.ramsey_times_s.empty(), "protocol.ramsey_times_s", "must not be empty");
  require(p.ramsey_times_s.size() == p.probe_counts.size(), "protocol.probe_counts",
          "must have one entry per Ramsey time");
  for (double t : p.ramsey_times_s)
    require(t > 0.0, "protocol.ramsey_times_s", "entries must be > 0");
  require(p.phase_points >= 4, "protocol.phase_points", "must be >= 4");
  for (auto n : p.probe_counts)
    require(n >= p.phase_points, "protocol.probe_counts", "entries must be >= phase_points");
  require(p.phase_step_rad > 0.0, "protocol.phase_step_rad", "must be > 0");
  require(std::abs(p.y_offset_1) < 1e-6, "protocol.y_offset_1", "must satisfy |y| < 1e-6");
  require(std::abs(p.y_offset_2) < 1e-6, "protocol.y_offset_2", "must satisfy |y| < 1e-6");

  const auto &e = s.estimation;
  require(e.coherence_prior_lower_s >= 0.0, "estimation.coherence_prior_lower_s", "must be >= 0");
  require(e.coherence_prior_upper_s > e.coherence_prior_lower_s,
          "estimation.coherence_prior_upper_s", "must exceed the lower bound");

  const auto &i = s.instability;
  require(i.t_min_s > 0.0, "instability.t_min_s", "must be > 0");
  require(i.t_max_s > i.t_min_s, "instability.t_max_s", "must exceed t_min_s");
  require(i.points >= 2, "instability.points", "must be >= 2");
  require(i.tau_s > 0.0, "instability.tau_s", "must be > 0");
  require(!i.report_t_s || *i.report_t_s > 0.0, "instability.report_t_s", "must be > 0");
  require(i.session_t_s > 0.0, "instability.session_t_s", "must be > 0");
  require(i.session_probes >= p.phase_points, "instability.session_probes",
          "must be >= protocol.phase_points");
  require(!i.session_contrast || (*i.session_contrast > 0.0 && *i.session_contrast <= 0.5),
          "instability.session_contrast", "must lie in (0, 0.5]");

  const auto &d = s.detection;
  require(d.bright_counts >= 0.0, "detection.bright_counts", "must be >= 0");
  require(d.dark_counts >= 0.0, "detection.dark_counts", "must be >= 0");
  require(d.strong_weight >= 0.0 && d.strong_weight <= 1.0, "detection.strong_weight",
          "must lie in [0, 1]");
  require(d.weak_weight >= 0.0 && d.weak_weight <= 1.0, "detection.weak_weight",
          "must lie in [0, 1]");
  require(d.cycle_duration_s > 0.0, "detection.cycle_duration_s", "must be > 0");
  require(d.threshold > 0.5 && d.threshold < 1.0, "detection.threshold", "must lie in (0.5, 1)");
  require(d.max_cycles >= 1 && d.max_cycles <= 1000000, "detection.max_cycles",
          "must lie in [1, 1000000]");
  require(d.trials >= 1, "detection.trials", "must be >= 1");

  const auto &r = s.remote;
  require(r.n_a >= 1, "remote.n_a", "must be >= 1");
  require(r.n_b >= 1, "remote.n_b", "must be >= 1");
  require(r.prior_var_rad2 >= 0.0, "remote.prior_var_rad2", "must be >= 0");
  require(r.laser_noise == "uniform-random" || r.laser_noise == "random-walk" ||
              r.laser_noise == "flicker-approximation",
          "remote.laser_noise", "must be uniform-random, random-walk or flicker-approximation");
  require(r.noise_magnitude_rad >= 0.0, "remote.noise_magnitude_rad", "must be >= 0");
  require(r.flicker_components >= 1 && r.flicker_components <= 40, "remote.flicker_components",
          "must lie in [1, 40]");
  require(r.t_s > 0.0, "remote.t_s", "must be > 0");
  require(r.edge_epsilon >= 0.0 && r.edge_epsilon < 1.0, "remote.edge_epsilon",
          "must lie in [0, 1)");
  require(r.ambiguity_sigmas > 0.0, "remote.ambiguity_sigmas", "must be > 0");
  require(r.shots >= 2, "remote.shots", "must be >= 2");
  require(r.tau_s > 0.0, "remote.tau_s", "must be > 0");
}

nlohmann::json to_json(const Scenario &s) {
  using nlohmann::json;
  const auto &c = s.clock;
  const auto &p = s.protocol;
  const auto &i = s.instability;
  const auto &d = s.detection;
  const auto &r = s.remote;
  json out;
  out["seed"] = s.seed ? json(*s.seed) : json(nullptr);
  out["clock"] = {{"nu_hz", c.nu_hz},
                  {"t_prime_s", c.t_prime_s},
                  {"detection_fidelity", c.detection_fidelity},
                  {"overhead_s", c.overhead_s},
                  {"session_overhead_s", c.session_overhead_s}};
  out["protocol"] = {{"ramsey_times_s", p.ramsey_times_s},
                     {"probe_counts", p.probe_counts},
                     {"phase_points", p.phase_points},
                     {"phase_start_rad", p.phase_start_rad},
                     {"phase_step_rad", p.phase_step_rad},
                     {"y_offset_1", p.y_offset_1},
                     {"y_offset_2", p.y_offset_2}};
  out["estimation"] = {{"coherence_prior_lower_s", s.estimation.coherence_prior_lower_s},
                       {"coherence_prior_upper_s", s.estimation.coherence_prior_upper_s}};
  out["instability"] = {{"t_min_s", i.t_min_s},
                        {"t_max_s", i.t_max_s},
                        {"points", i.points},
                        {"tau_s", i.tau_s},
                        {"report_t_s", i.report_t_s ? json(*i.report_t_s) : json(nullptr)},
                        {"session_t_s", i.session_t_s},
                        {"session_probes", i.session_probes},
                        {"session_contrast",
                         i.session_contrast ? json(*i.session_contrast) : json(nullptr)}};
  out["detection"] = {{"bright_counts", d.bright_counts},   {"dark_counts", d.dark_counts},
                      {"strong_weight", d.strong_weight},   {"weak_weight", d.weak_weight},
                      {"cycle_duration_s", d.cycle_duration_s}, {"threshold", d.threshold},
                      {"max_cycles", d.max_cycles},         {"trials", d.trials}};
  out["remote"] = {{"n_a", r.n_a},
                   {"n_b", r.n_b},
                   {"true_dphi_ab_rad", r.true_dphi_ab_rad},
                   {"prior_dphi_ab_rad", r.prior_dphi_ab_rad},
                   {"prior_var_rad2", r.prior_var_rad2},
                   {"calibrate", r.calibrate},
                   {"theta_a_rad", r.theta_a_rad},
                   {"theta_b_rad", r.theta_b_rad},
                   {"laser_noise", r.laser_noise},
                   {"noise_magnitude_rad", r.noise_magnitude_rad},
                   {"flicker_components", r.flicker_components},
                   {"synchronized", r.synchronized},
                   {"t_s", r.t_s},
                   {"edge_epsilon", r.edge_epsilon},
                   {"ambiguity_sigmas", r.ambiguity_sigmas},
                   {"shots", r.shots},
                   {"tau_s", r.tau_s}};
  return out;
}

csp_remote_config remote_config(const Scenario &s) {
  const auto &r = s.remote;
  csp_remote_config c = csp_remote_config_default();
  c.n_a = r.n_a;
  c.n_b = r.n_b;
  c.true_dphi_ab = r.true_dphi_ab_rad;
  c.prior_dphi_ab = r.prior_dphi_ab_rad;
  c.prior_var = r.prior_var_rad2;
  c.theta_a = r.theta_a_rad;
  c.theta_b = r.theta_b_rad;
  c.noise_kind = r.laser_noise == "random-walk"             ? CSP_LASER_RANDOM_WALK
                 : r.laser_noise == "flicker-approximation" ? CSP_LASER_FLICKER
                                                            : CSP_LASER_UNIFORM_RANDOM;
  c.noise_magnitude_rad = r.noise_magnitude_rad;
  c.flicker_components = static_cast<std::uint32_t>(r.flicker_components);
  c.synchronized = r.synchronized ? 1 : 0;
  c.t_s = r.t_s;
  c.edge_epsilon = r.edge_epsilon;
  c.ambiguity_sigmas = r.ambiguity_sigmas;
  if (r.calibrate)
    check(csp_calibrate_quadrature(&c), "remote");
  return c;
}

} // namespace cli
