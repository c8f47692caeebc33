#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"
#include "corrspec/corrspec.h"
#include "support.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Correlation Ramsey spectroscopy simulator and estimator"};
  app.set_version_flag("--version", std::string(csp_version()));
  app.require_subcommand(1);

  cli::CommandOptions options;
  const std::map<std::string, std::pair<std::string, std::function<int(const cli::CommandOptions &)>>>
      commands{
          {"simulate-fringe", {"Simulate correlation fringes for each Ramsey time", cli::simulate_fringe}},
          {"fit", {"Maximum-likelihood fringe fits and phase drift", cli::fit}},
          {"coherence", {"Bayesian contrast-decay fit and Q-factors", cli::coherence}},
          {"instability", {"Instability curves and a simulated session", cli::instability}},
          {"remote", {"Synchronised two-ensemble comparison", cli::remote}},
          {"detect-bench", {"Adaptive joint-state detection benchmark", cli::detect_bench}},
      };

  std::map<std::string, CLI::App *> subs;
  for (const auto &[name, entry] : commands) {
    auto *sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", options.config, "YAML scenario file");
    sub->add_option("--seed", options.seed, "64-bit seed (overrides the config)");
    sub->add_option("--out", options.out, "Output directory")->capture_default_str();
    sub->add_option("--probes", options.probes,
                    "Override the probe, shot or trial count of the command");
    sub->add_option("--workers", options.workers, "Worker threads")
        ->capture_default_str()
        ->check(CLI::Range(1u, 256u));
    sub->add_flag("--timestamps", options.timestamps, "Record wall-clock times in the manifest");
    if (name == "fit" || name == "coherence")
      sub->add_option("--input", options.input,
                      name == "fit" ? "Fringe CSV (default <out>/fringe.csv)"
                                    : "Fit JSON (default <out>/fits.json)");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kSuccess : cli::kConfigError;
  }

  for (const auto &[name, sub] : subs) {
    if (!sub->parsed())
      continue;
    try {
      return commands.at(name).second(options);
    } catch (const cli::ConfigError &e) {
      std::cerr << "corrspec: configuration error: " << e.what() << "\n";
      return cli::kConfigError;
    } catch (const cli::StatisticalError &e) {
      std::cerr << "corrspec: not identifiable: " << e.what() << "\n";
      return cli::kNotIdentifiable;
    } catch (const cli::IoError &e) {
      std::cerr << "corrspec: I/O error: " << e.what() << "\n";
      return cli::kIoError;
    } catch (const std::exception &e) {
      std::cerr << "corrspec: internal error: " << e.what() << "\n";
      return cli::kInternal;
    }
  }
  return cli::kInternal;
}
