#pragma once

#include "defectmc/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace defectmc {

struct RunOverrides {
  std::optional<RunMode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output;
};

void apply_overrides(RunConfig& config, const RunOverrides& overrides);

TightBindingModel build_model(const RunConfig& config);

/// The energy grid a run will use, and the DoS half-width on it.
struct ResolvedGrid {
  EnergyGrid grid;
  double dos_step = 0.0;
};

ResolvedGrid resolve_energy_grid(const RunConfig& config, const TightBindingModel& model);

/// Executes the configured mode and writes its artifacts into
/// config.output. Throws ConfigError or NumericalError on failure.
void execute_run(const RunConfig& config, std::ostream& log);

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
};

/// Loads, overrides and runs a config file. Failures are reported as one
/// JSON error record on `err` (and as error.json in the output directory
/// when it is known); the return value is the process exit code.
int run_config_file(const std::string& path, const RunOverrides& overrides, std::ostream& log, std::ostream& err);

} // namespace defectmc
