#pragma once

#include <ostream>

#include "mixedsde/config.hpp"

namespace mixedsde {

/// Command entry points. Each writes its artifacts (plus a resolved
/// copy of the configuration) into config.output_dir and returns the
/// process exit status: 0 PASS, 1 scientific FAIL or run error.
/// Configuration and plan problems escape as ConfigError/PlanError and
/// map to exit code 2 in the driver.
int run_convergence(const ExperimentConfig& config, std::ostream& log);
int run_simulate(const ExperimentConfig& config, std::ostream& log);
int run_noise_test(const ExperimentConfig& config, std::ostream& log);
int run_diagnostics(const ExperimentConfig& config, std::ostream& log);

int run_command(const ExperimentConfig& config, std::ostream& log);

}  // namespace mixedsde
