// defectmc: expected IDoS/DoS of honeycomb materials with random vacancies.
//
//   defectmc run --config run.json [--seed N] [--workers N] [--out DIR]
//   defectmc rates|exhaustive|bands --config run.json ...
//
// `run` uses the mode from the config; the other subcommands force theirs.
// DEFECTMC_WORKERS sets the worker count unless --workers is given.

#include "defectmc/run.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and multilevel estimates of the density of states of defected honeycomb materials"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;

  struct Command {
    const char* name;
    const char* help;
    std::optional<defectmc::RunMode> mode;
  };
  const Command commands[] = {
      {"run", "run the mode named in the config", std::nullopt},
      {"rates", "fit convergence rates over doubling supercells", defectmc::RunMode::Rates},
      {"exhaustive", "exact expectation by enumerating all vacancy configurations", defectmc::RunMode::Exhaustive},
      {"bands", "band energies of one (possibly defected) supercell", defectmc::RunMode::Bands},
  };
  std::vector<std::pair<CLI::App*, std::optional<defectmc::RunMode>>> subcommands;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "output directory");
    subcommands.emplace_back(sub, c.mode);
  }

  CLI11_PARSE(app, argc, argv);

  defectmc::RunOverrides overrides;
  overrides.seed = seed;
  overrides.output = out;
  overrides.workers = workers;
  if (!workers) {
    if (const char* env = std::getenv("DEFECTMC_WORKERS")) {
      try {
        overrides.workers = std::stoi(env);
      } catch (const std::exception&) {
        std::cerr << R"({"status":"error","kind":"config","message":"DEFECTMC_WORKERS is not an integer","exit_code":2})"
                  << '\n';
        return defectmc::kExitConfig;
      }
    }
  }
  for (const auto& [sub, mode] : subcommands)
    if (sub->parsed()) overrides.mode = mode;

  return defectmc::run_config_file(config_path, overrides, std::cerr, std::cerr);
}
