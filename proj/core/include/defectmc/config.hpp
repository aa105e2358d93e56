#pragma once

#include "defectmc/mlmc.hpp"
#include "defectmc/pipeline.hpp"
#include "defectmc/tbmodel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace defectmc {

enum class RunMode { Mc, Mlmc, Exhaustive, Rates, Bands };

std::string to_string(RunMode mode);
RunMode parse_run_mode(const std::string& text);

struct MaterialConfig {
  enum class Kind { Graphene, MultiOrbital };
  Kind kind = Kind::Graphene;
  GrapheneNNModel graphene;
  std::string couplings; // resolved path of the coupling table
};

struct LevelsConfig {
  int c = 1;
  int count = 2;
  int nq = 16;
  std::vector<std::size_t> samples{42, 21};
  bool exhaustive_first = false;
};

struct McConfig {
  int n = 8;
  int q = 2;
  std::size_t samples = 100;
};

struct RatesConfig {
  std::vector<int> sizes{4, 8, 16};
  int nq = 16;
  std::size_t samples = 200;
};

struct ExhaustiveConfig {
  int n = 1;
  int q = 16;
  std::size_t max_units = 24;
  bool translation_symmetry = false;
};

struct BandsConfig {
  int n = 1;
  int q = 16;
  bool sample_defects = false;
};

struct AllocationConfig {
  double tol = 1e-3;
  double theta = 0.5;
  double c_alpha = 1.96;
};

struct RateInputs {
  double W = 0.0;
  double S = 0.0;
  double D = 0.0;
  double C = 0.0;
};

struct RunConfig {
  RunMode mode = RunMode::Mlmc;
  MaterialConfig material;
  double lattice_constant = 1.0;
  AreaUnit area_unit = AreaUnit::Cell;
  double p_vac = 0.0;
  SmoothingSpec smoothing;

  std::size_t energy_points = 4096;
  std::optional<double> energy_min;
  std::optional<double> energy_max;
  std::optional<double> energy_step;
  std::optional<double> dos_step;
  std::optional<std::pair<double, double>> energy_window;

  BzMode bz_mode = BzMode::Reduced;
  std::uint64_t seed = 0;
  int workers = 1;
  bool cache = true;
  std::string output = "out";

  LevelsConfig levels;
  McConfig mc;
  RatesConfig rates;
  ExhaustiveConfig exhaustive;
  BandsConfig bands;
  std::size_t slmc_samples = 0;
  std::optional<AllocationConfig> allocation;
  std::optional<RateInputs> complexity;

  std::string echo; // the parsed document, re-serialized
};

/// Parses a JSON run configuration. Comments are allowed; unknown keys are
/// errors. Relative coupling-table paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>",
                           const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

} // namespace defectmc
