#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace cli {

struct CommandOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::uint64_t> probes;
  unsigned workers = 1;
  std::string input;
  bool timestamps = false;
};

// Each command writes its outputs and manifest, then returns the exit code.
int simulate_fringe(const CommandOptions &options);
int fit(const CommandOptions &options);
int coherence(const CommandOptions &options);
int instability(const CommandOptions &options);
int remote(const CommandOptions &options);
int detect_bench(const CommandOptions &options);

} // namespace cli
