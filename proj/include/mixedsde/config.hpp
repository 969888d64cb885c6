#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mixedsde/errors.hpp"
#include "mixedsde/noise.hpp"

namespace mixedsde {

/// Configuration or usage problem; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Command { kConvergence, kSimulate, kNoiseTest, kDiagnostics };

const char* command_name(Command command);

/// Resolved experiment parameters for one command, built from the
/// matching INI section plus command-line overrides. Unused fields keep
/// their defaults.
struct ExperimentConfig {
  Command command = Command::kConvergence;

  std::string model = "trig";
  double hurst = 0.75;
  double horizon = 1.0;
  std::int64_t fine_n = 65536;
  std::vector<std::int64_t> factors = {16, 32, 64, 128, 256, 512};
  std::int64_t paths = 2000;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  SamplerKind sampler = SamplerKind::kAuto;
  bool degenerate_brownian = false;
  int workers = 0;

  // simulate / noise-test grid size.
  std::int64_t steps_n = 64;

  // diagnostics sweeps (doubling from min to max inclusive).
  std::int64_t moment_n_min = 64;
  std::int64_t moment_n_max = 4096;
  std::int64_t continuity_n_min = 16;
  std::int64_t continuity_n_max = 1024;
  double exp_m = 1.0;
  std::int64_t exp_n = 1024;
  std::int64_t exp_paths = 100000;

  HurstIndex hurst_index() const;
};

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
  std::optional<SamplerKind> sampler;
  bool degenerate_brownian = false;
};

SamplerKind parse_sampler_kind(const std::string& text);

/// Parses the INI file, picks the section matching `command`, applies
/// overrides, and validates. Throws ConfigError with file:line context
/// for malformed input and unknown keys.
ExperimentConfig load_config(const std::string& path, Command command,
                             const CliOverrides& overrides);
ExperimentConfig load_config_text(std::istream& in, const std::string& origin,
                                  Command command, const CliOverrides& overrides);

/// Writes the fully resolved configuration back out as INI; every
/// output directory receives one of these for reproducibility.
void write_resolved_config(const ExperimentConfig& config, std::ostream& out);

}  // namespace mixedsde
