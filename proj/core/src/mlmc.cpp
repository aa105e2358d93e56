#include "defectmc/mlmc.hpp"

#include "defectmc/error.hpp"
#include "defectmc/parallel.hpp"

#include <algorithm>
#include <chrono>

namespace defectmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct TaskOutput {
  SamplePipeline::Curve fine;
  std::vector<double> coarse; // empty on level 1
  std::size_t cache_hits = 0;
  double fine_seconds = 0.0;
};

// Runs `count` tasks in fixed-size batches and hands each result to `fold`
// in task order.
template <typename Task, typename Fold>
void run_batched(std::size_t count, const EstimatorOptions& options, Task&& task, Fold&& fold,
                 const std::function<std::string(std::size_t)>& describe) {
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  for (std::size_t first = 0; first < count; first += batch) {
    const std::size_t size = std::min(batch, count - first);
    auto results = parallel_map(
        size, options.workers, [&](std::size_t i) { return task(first + i); },
        [&](std::size_t i) { return describe(first + i); });
    for (auto& r : results) fold(r);
  }
}

void subtract(std::span<const double> a, std::span<const double> b, std::vector<double>& out) {
  out.resize(a.size());
  for (std::size_t m = 0; m < a.size(); ++m) out[m] = a[m] - b[m];
}

LevelResult sampled_level(const SamplePipeline& pipeline, int level, const LevelSpec& spec,
                          const EstimatorOptions& options) {
  const std::size_t points = pipeline.grid().points;
  const bool with_cv = level >= 2;
  if (with_cv && spec.n % 2 != 0)
    throw ConfigError("level " + std::to_string(level) + " has odd supercell factor " + std::to_string(spec.n));

  CurveAccumulator y(points);
  CurveAccumulator q(points);
  LevelResult result;
  result.level = level;
  result.n = spec.n;
  result.q = spec.q;
  result.samples = spec.samples;

  auto task = [&](std::size_t m) {
    const DefectConfiguration omega =
        pipeline.draw(spec.n, SeedSpec{options.master_seed, level, static_cast<std::int64_t>(m), options.stream});
    TaskOutput out;
    if (with_cv) {
      auto cv = pipeline.control_variate_sample(spec.n, spec.q, omega);
      out.fine = std::move(cv.fine);
      out.coarse = std::move(cv.coarse);
      out.cache_hits = cv.cache_hits;
    } else {
      auto eval = pipeline.quantity(spec.n, spec.q, omega);
      out.fine = std::move(eval.values);
      out.cache_hits = eval.cache_hits;
    }
    return out;
  };
  std::vector<double> diff;
  auto fold = [&](TimedResult<TaskOutput>& r) {
    const auto& fine = *r.value.fine;
    q.add(fine);
    if (with_cv) {
      subtract(fine, r.value.coarse, diff);
      y.add(diff);
    }
    result.wall_time_s += r.seconds;
    result.cache_hits += r.value.cache_hits;
  };
  run_batched(spec.samples, options, task, fold, [&](std::size_t m) {
    return "(level " + std::to_string(level) + ", replicate " + std::to_string(m) + ")";
  });

  result.q_mean = q.mean();
  result.q_variance = q.variance();
  if (with_cv) {
    result.mean = y.mean();
    result.variance = y.variance();
  } else {
    result.mean = result.q_mean;
    result.variance = result.q_variance;
  }
  result.estimator_variance = result.variance;
  for (auto& v : result.estimator_variance) v /= static_cast<double>(spec.samples);
  const auto& grid = pipeline.grid();
  result.mean_level_variance = window_mean(grid, result.variance, options.window_lo, options.window_hi);
  result.mean_q_variance = window_mean(grid, result.q_variance, options.window_lo, options.window_hi);
  return result;
}

MlmcEstimate combine(const SamplePipeline& pipeline, std::vector<LevelResult> levels, double wall_time) {
  MlmcEstimate estimate;
  estimate.grid = pipeline.grid();
  estimate.mean.assign(estimate.grid.points, 0.0);
  estimate.variance.assign(estimate.grid.points, 0.0);
  for (const auto& level : levels) {
    for (std::size_t m = 0; m < estimate.grid.points; ++m) {
      estimate.mean[m] += level.mean[m];
      estimate.variance[m] += level.estimator_variance[m];
    }
    if (!level.exhaustive && level.samples < 2) estimate.variance_available = false;
  }
  estimate.levels = std::move(levels);
  estimate.wall_time_s = wall_time;
  return estimate;
}

} // namespace

LevelPlan LevelPlan::doubling(int c, int level_count, int nq, const std::vector<std::size_t>& samples) {
  if (c < 1) throw ConfigError("level base factor c must be >= 1");
  if (level_count < 1) throw ConfigError("level count must be >= 1");
  if (samples.size() != static_cast<std::size_t>(level_count))
    throw ConfigError("need one sample count per level");
  LevelPlan plan;
  for (int l = 1; l <= level_count; ++l) {
    const int n = c << l;
    if (nq % n != 0)
      throw ConfigError("n*q = " + std::to_string(nq) + " is not divisible by level " + std::to_string(l) +
                        " supercell factor " + std::to_string(n));
    plan.levels.push_back({n, nq / n, samples[static_cast<std::size_t>(l - 1)], false});
  }
  plan.validate();
  return plan;
}

void LevelPlan::validate() const {
  if (levels.empty()) throw ConfigError("level plan is empty");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& level = levels[l];
    if (level.n < 1 || level.q < 1) throw ConfigError("level sizes must be positive");
    if (level.samples < 1 && !level.exhaustive) throw ConfigError("every level needs at least one sample");
    if (level.exhaustive && l != 0) throw ConfigError("only level 1 may be exhaustive");
    if (l > 0) {
      if (level.n != 2 * levels[l - 1].n)
        throw ConfigError("supercell factors must double from level to level");
      if (2 * level.q != levels[l - 1].q)
        throw ConfigError("level " + std::to_string(l + 1) +
                          " k-resolution must be half the previous level's so that n*q stays constant");
    }
  }
}

CurveAccumulator::CurveAccumulator(std::size_t points)
    : sum_(points, 0.0), shift_(points, 0.0), shifted_sum_(points, 0.0), shifted_sq_(points, 0.0) {}

void CurveAccumulator::add(std::span<const double> curve) {
  if (curve.size() != sum_.size()) throw ConfigError("curve length does not match accumulator");
  if (count_ == 0) std::copy(curve.begin(), curve.end(), shift_.begin());
  for (std::size_t m = 0; m < curve.size(); ++m) {
    sum_[m] += curve[m];
    const double d = curve[m] - shift_[m];
    shifted_sum_[m] += d;
    shifted_sq_[m] += d * d;
  }
  ++count_;
}

std::vector<double> CurveAccumulator::mean() const {
  std::vector<double> out(sum_.size(), 0.0);
  if (count_ == 0) return out;
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = sum_[m] / static_cast<double>(count_);
  return out;
}

std::vector<double> CurveAccumulator::variance() const {
  std::vector<double> out(sum_.size(), 0.0);
  if (count_ < 2) return out;
  const double c = static_cast<double>(count_);
  for (std::size_t m = 0; m < out.size(); ++m)
    out[m] = std::max(0.0, (shifted_sq_[m] - shifted_sum_[m] * shifted_sum_[m] / c) / (c - 1.0));
  return out;
}

MlmcEstimate mc_estimate(const SamplePipeline& pipeline, const LevelSpec& level, const EstimatorOptions& options) {
  if (level.samples < 1) throw ConfigError("Monte Carlo needs at least one sample");
  const auto start = Clock::now();
  std::vector<LevelResult> levels;
  levels.push_back(sampled_level(pipeline, 1, level, options));
  return combine(pipeline, std::move(levels), seconds_since(start));
}

MlmcEstimate mlmc_estimate(const SamplePipeline& pipeline, const LevelPlan& plan, const EstimatorOptions& options) {
  plan.validate();
  const auto start = Clock::now();
  std::vector<LevelResult> levels;
  for (std::size_t l = 0; l < plan.levels.size(); ++l) {
    const auto& spec = plan.levels[l];
    if (spec.exhaustive) {
      levels.push_back(exhaustive_level(pipeline, spec.n, spec.q, options));
    } else {
      levels.push_back(sampled_level(pipeline, static_cast<int>(l) + 1, spec, options));
    }
  }
  return combine(pipeline, std::move(levels), seconds_since(start));
}

LevelResult exhaustive_level(const SamplePipeline& pipeline, int n, int q, const EstimatorOptions& options,
                             const EnumerationOptions& enumeration) {
  const auto configs = enumerate_configs(pipeline.supercell(n), pipeline.settings().p_vac, enumeration);
  const std::size_t points = pipeline.grid().points;
  LevelResult result;
  result.level = 1;
  result.n = n;
  result.q = q;
  result.samples = configs.size();
  result.exhaustive = true;

  std::vector<double> mean(points, 0.0);
  std::vector<double> shift;
  std::vector<double> shifted(points, 0.0);
  std::vector<double> shifted_sq(points, 0.0);
  std::size_t index = 0;
  auto fold = [&](TimedResult<SamplePipeline::Evaluation>& r) {
    const auto& values = *r.value.values;
    const double w = configs[index++].weight;
    if (shift.empty()) shift = values;
    for (std::size_t m = 0; m < points; ++m) {
      mean[m] += w * values[m];
      const double d = values[m] - shift[m];
      shifted[m] += w * d;
      shifted_sq[m] += w * d * d;
    }
    result.wall_time_s += r.seconds;
    result.cache_hits += r.value.cache_hits;
  };
  run_batched(
      configs.size(), options, [&](std::size_t i) { return pipeline.quantity(n, q, configs[i].config); }, fold,
      [&](std::size_t i) { return "(exhaustive n=" + std::to_string(n) + ", configuration " + std::to_string(i) + ")"; });

  result.mean = mean;
  result.q_mean = mean;
  result.variance.resize(points);
  for (std::size_t m = 0; m < points; ++m)
    result.variance[m] = std::max(0.0, shifted_sq[m] - shifted[m] * shifted[m]);
  result.q_variance = result.variance;
  result.estimator_variance.assign(points, 0.0);
  const auto& grid = pipeline.grid();
  result.mean_level_variance = window_mean(grid, result.variance, options.window_lo, options.window_hi);
  result.mean_q_variance = result.mean_level_variance;
  return result;
}

SizeStatistics size_statistics(const SamplePipeline& pipeline, int n, int q, std::size_t samples,
                               const EstimatorOptions& options) {
  if (samples < 2) throw ConfigError("rate estimation needs at least two samples per size");
  const std::size_t points = pipeline.grid().points;
  const bool with_cv = n % 2 == 0;
  CurveAccumulator qacc(points);
  CurveAccumulator dacc(points);
  SizeStatistics stats;
  stats.n = n;
  stats.q = q;
  stats.samples = samples;
  double fine_seconds = 0.0;

  auto task = [&](std::size_t m) {
    const DefectConfiguration omega =
        pipeline.draw(n, SeedSpec{options.master_seed, n, static_cast<std::int64_t>(m), options.stream});
    TaskOutput out;
    const auto fine_start = Clock::now();
    auto eval = pipeline.quantity(n, q, omega);
    out.fine_seconds = seconds_since(fine_start);
    out.fine = std::move(eval.values);
    out.cache_hits = eval.cache_hits;
    if (with_cv) {
      // The fine member is cached (or recomputed) inside the control variate.
      auto cv = pipeline.control_variate_sample(n, q, omega);
      out.coarse = std::move(cv.coarse);
      out.cache_hits += cv.cache_hits;
    }
    return out;
  };
  std::vector<double> diff;
  auto fold = [&](TimedResult<TaskOutput>& r) {
    const auto& fine = *r.value.fine;
    qacc.add(fine);
    if (with_cv) {
      subtract(fine, r.value.coarse, diff);
      dacc.add(diff);
    }
    stats.wall_time_s += r.seconds;
    fine_seconds += r.value.fine_seconds;
    stats.cache_hits += r.value.cache_hits;
  };
  run_batched(samples, options, task, fold, [&](std::size_t m) {
    return "(size n=" + std::to_string(n) + ", replicate " + std::to_string(m) + ")";
  });

  const auto& grid = pipeline.grid();
  stats.q_mean = qacc.mean();
  stats.q_variance = qacc.variance();
  stats.mean_q_variance = window_mean(grid, stats.q_variance, options.window_lo, options.window_hi);
  if (with_cv) {
    stats.diff_variance = dacc.variance();
    stats.mean_diff_variance = window_mean(grid, *stats.diff_variance, options.window_lo, options.window_hi);
  }
  stats.fine_time_per_sample = fine_seconds / static_cast<double>(samples);
  return stats;
}

} // namespace defectmc
