#pragma once

#include "defectmc/pipeline.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <optional>
#include <vector>

namespace defectmc {

/// One level of a hierarchy: supercell factor, k-resolution, sample count.
struct LevelSpec {
  int n = 1;
  int q = 1;
  std::size_t samples = 1;
  bool exhaustive = false; // level 1 only: exact expectation by enumeration
};

/// Levels n_l = c * 2^l, l = 1..L, with n_l * q_l held constant.
struct LevelPlan {
  std::vector<LevelSpec> levels;

  static LevelPlan doubling(int c, int level_count, int nq, const std::vector<std::size_t>& samples);
  void validate() const;
};

/// Streaming pointwise mean and unbiased variance of equally sized curves,
/// accumulated in call order. The mean is sum/count; the variance uses
/// sums shifted by the first curve so identical inputs give exactly zero.
class CurveAccumulator {
public:
  explicit CurveAccumulator(std::size_t points = 0);

  void add(std::span<const double> curve);
  std::size_t count() const { return count_; }
  std::vector<double> mean() const;
  /// Unbiased sample variance; zeros when fewer than two curves were added.
  std::vector<double> variance() const;

private:
  std::size_t count_ = 0;
  std::vector<double> sum_;
  std::vector<double> shift_;
  std::vector<double> shifted_sum_;
  std::vector<double> shifted_sq_;
};

struct LevelResult {
  int level = 1;
  int n = 1;
  int q = 1;
  std::size_t samples = 0;
  bool exhaustive = false;

  std::vector<double> mean;     // of Y_l: Q_1 on level 1, Q_l - Q_l^CV above
  std::vector<double> variance; // of Y_l (population variance when exhaustive)
  std::vector<double> q_mean;     // of Q_l alone
  std::vector<double> q_variance; // of Q_l alone
  std::vector<double> estimator_variance; // variance / samples, zero when exhaustive

  double mean_level_variance = 0.0; // window mean of `variance`
  double mean_q_variance = 0.0;     // window mean of `q_variance`
  double wall_time_s = 0.0;         // summed over the level's tasks
  std::size_t cache_hits = 0;

  double work_per_sample() const { return samples == 0 ? 0.0 : wall_time_s / static_cast<double>(samples); }
};

struct MlmcEstimate {
  EnergyGrid grid;
  std::vector<double> mean;
  std::vector<double> variance; // sum_l V_l / M_l pointwise
  bool variance_available = true;
  std::vector<LevelResult> levels;
  double wall_time_s = 0.0;
};

struct EstimatorOptions {
  std::uint64_t master_seed = 0;
  std::uint64_t stream = 0;
  int workers = 1;
  double window_lo = -std::numeric_limits<double>::infinity();
  double window_hi = std::numeric_limits<double>::infinity();
  /// Tasks handed to the workers at once; results are folded in task order.
  std::size_t batch_size = 256;
};

/// Plain Monte Carlo mean of Q over `level.samples` outcomes.
MlmcEstimate mc_estimate(const SamplePipeline& pipeline, const LevelSpec& level, const EstimatorOptions& options);

/// Multilevel estimator: level 1 is plain Monte Carlo (or exhaustive),
/// level l >= 2 averages Q_l - Q_l^CV over independent outcomes.
MlmcEstimate mlmc_estimate(const SamplePipeline& pipeline, const LevelPlan& plan, const EstimatorOptions& options);

/// Exact expectation and population variance of Q on (n, q) by enumerating
/// every vacancy configuration.
LevelResult exhaustive_level(const SamplePipeline& pipeline, int n, int q, const EstimatorOptions& options,
                             const EnumerationOptions& enumeration = {});

/// Per-size statistics used for rate fitting: Q_n and, for even n, the
/// control-variate difference Q_n - Q_n^CV, from the same outcomes.
struct SizeStatistics {
  int n = 1;
  int q = 1;
  std::size_t samples = 0;
  std::vector<double> q_mean;
  std::vector<double> q_variance;
  std::optional<std::vector<double>> diff_variance;
  double mean_q_variance = 0.0;
  std::optional<double> mean_diff_variance;
  double wall_time_s = 0.0;       // summed over tasks
  double fine_time_per_sample = 0.0; // time spent on Q_n alone
  std::size_t cache_hits = 0;
};

SizeStatistics size_statistics(const SamplePipeline& pipeline, int n, int q, std::size_t samples,
                               const EstimatorOptions& options);

} // namespace defectmc
