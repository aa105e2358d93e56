#pragma once

#include "defectmc/mlmc.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace defectmc {

/// y ~ A * x^exponent by least squares in log-log space.
struct PowerLawFit {
  double exponent = 0.0;
  double stderr_exponent = 0.0; // NaN with only two points
  double log_prefactor = 0.0;
  std::size_t points = 0;
};

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

struct Rate {
  double value = 0.0;
  double stderr_value = 0.0;
  std::size_t points = 0;
};

/// Positive rates: bias ~ n^-W, Var Q ~ n^-S, Var(Q - Q^CV) ~ n^-D, cost ~ n^C.
struct RateEstimates {
  std::optional<Rate> W;
  std::optional<Rate> S;
  std::optional<Rate> D;
  std::optional<Rate> C;

  bool mlmc_benefit() const { return D && S && D->value > S->value; }
  bool mc_benefit() const { return C && S && C->value > S->value; }
};

/// Per-size scalar observations. The bias proxy for consecutive sizes is the
/// window mean of |mean(Q_n) - mean(Q_2n)| and is attributed to the smaller n.
struct RateObservations {
  std::vector<double> sizes;
  std::vector<double> bias_proxy;                 // sizes.size() - 1 entries, or empty
  std::vector<double> variance;                   // window-mean Var Q_n
  std::vector<std::optional<double>> diff_variance; // window-mean Var(Q_n - Q_n^CV)
  std::vector<double> work;                       // seconds per sample
};

RateEstimates fit_rates(const RateObservations& observations);

/// Observations from a sequence of doubling sizes.
RateObservations observations_from(const std::vector<SizeStatistics>& sizes, const EnergyGrid& grid,
                                   double window_lo, double window_hi);

/// Samples per level minimizing sum M_l W_l subject to
/// sum V_l / M_l <= (theta * tol / c_alpha)^2.
std::vector<std::size_t> optimal_samples(std::span<const double> V, std::span<const double> W, double tol,
                                         double theta, double c_alpha);

/// Share of the squared tolerance given to the statistical error.
double splitting_theta(double W, double S, double C);

struct ComplexityExponents {
  double fixed_samples = 0.0; // 2C/S
  double slmc = 0.0;          // 2 + (C - S)/W
  double mlmc = 0.0;          // 2 + (C - D)/W
  bool sampling_regime_valid = true; // S < 2W
};

ComplexityExponents complexity_exponents(double W, double S, double D, double C);

struct SlmcComparison {
  EnergyGrid grid;
  std::vector<double> mlmc_variance;   // estimator variance of the multilevel run
  std::vector<double> slmc_variance;   // estimator variance with the SLMC samples taken
  std::vector<double> rescaled_slmc;   // SLMC estimator variance at the sample count matching the MLMC level
  double rescale = 1.0;                // SLMC samples needed / SLMC samples taken
  double slmc_samples_needed = 0.0;
  double slmc_time_per_sample = 0.0;
  double mlmc_time_s = 0.0;        // summed task time over all levels
  double slmc_time_needed_s = 0.0;
  double work_ratio = 1.0; // R = MLMC time / SLMC time needed
};

/// Compares a multilevel estimate with single-level samples at the finest
/// size. The SLMC cost is assumed linear in the number of samples.
SlmcComparison slmc_comparison(const MlmcEstimate& mlmc, const LevelResult& slmc, double window_lo,
                               double window_hi);

} // namespace defectmc
