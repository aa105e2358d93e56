#include "defectmc/error.hpp"
#include "defectmc/mlmc.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace defectmc {
namespace {

using testing::graphene;
using testing::settings_for;

TEST(CurveAccumulator, MatchesTwoPass) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(5.0, 2.0);
  CurveAccumulator acc(3);
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 50; ++i) {
    data.push_back({normal(rng), normal(rng) * 1e-3, 1e6 + normal(rng)});
    acc.add(data.back());
  }
  for (std::size_t p = 0; p < 3; ++p) {
    double mean = 0.0;
    for (const auto& d : data) mean += d[p];
    mean /= 50.0;
    double var = 0.0;
    for (const auto& d : data) var += (d[p] - mean) * (d[p] - mean);
    var /= 49.0;
    EXPECT_NEAR(acc.mean()[p], mean, 1e-12 * std::abs(mean));
    EXPECT_NEAR(acc.variance()[p], var, 1e-9 * var);
  }
}

TEST(CurveAccumulator, IdenticalCurvesHaveZeroVariance) {
  CurveAccumulator acc(2);
  for (int i = 0; i < 10; ++i) acc.add(std::vector<double>{0.1, 0.7});
  EXPECT_EQ(acc.variance(), (std::vector<double>{0.0, 0.0}));
  CurveAccumulator one(2);
  one.add(std::vector<double>{1.0, 2.0});
  EXPECT_EQ(one.variance(), (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(one.add(std::vector<double>{1.0}), ConfigError);
}

TEST(LevelPlan, DoublingKeepsResolution) {
  const auto plan = LevelPlan::doubling(1, 3, 16, {10, 5, 2});
  ASSERT_EQ(plan.levels.size(), 3u);
  EXPECT_EQ(plan.levels[0].n, 2);
  EXPECT_EQ(plan.levels[2].n, 8);
  for (const auto& l : plan.levels) EXPECT_EQ(l.n * l.q, 16);
  EXPECT_THROW(LevelPlan::doubling(1, 3, 12, {1, 1, 1}), ConfigError);
  EXPECT_THROW(LevelPlan::doubling(1, 2, 16, {1}), ConfigError);
  LevelPlan bad{{{2, 8, 1, false}, {6, 2, 1, false}}};
  EXPECT_THROW(bad.validate(), ConfigError);
  LevelPlan late_exhaustive{{{2, 8, 1, false}, {4, 4, 1, true}}};
  EXPECT_THROW(late_exhaustive.validate(), ConfigError);
}

TEST(McEstimate, NoDefectsGiveUnperturbedCurve) {
  const SamplePipeline p(graphene(), settings_for(0.0, -8.0, 16.0, 300));
  const auto est = mc_estimate(p, {2, 2, 5, false}, {});
  const auto reference = p.compute_quantity(2, 2, empty_configuration(p.supercell(2)));
  for (std::size_t m = 0; m < est.mean.size(); ++m) {
    EXPECT_EQ(est.variance[m], 0.0);
    EXPECT_NEAR(est.mean[m], reference[m], 1e-15);
  }
}

TEST(McEstimate, TerminalIdosIsOneOnAverage) {
  const SamplePipeline p(graphene(), settings_for(0.5, -8.0, 16.0, 200));
  const auto est = mc_estimate(p, {2, 1, 2000, false}, {3});
  const double se = std::sqrt(est.variance.back());
  EXPECT_GT(se, 0.0);
  EXPECT_NEAR(est.mean.back(), 1.0, 3.0 * se);
}

TEST(McEstimate, MeanIsArithmeticAverageOfSamples) {
  const SamplePipeline p(graphene(), settings_for(0.2, -8.0, 16.0, 100));
  EstimatorOptions o;
  o.master_seed = 5;
  o.batch_size = 3;
  const auto est = mc_estimate(p, {2, 2, 7, false}, o);
  std::vector<double> sum(100, 0.0);
  for (int m = 0; m < 7; ++m) {
    const auto q = p.compute_quantity(2, 2, p.draw(2, {5, 1, m, 0}));
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += q[i];
  }
  for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_EQ(est.mean[i], sum[i] / 7.0);
}

TEST(McEstimate, SingleSampleFlagsVariance) {
  const SamplePipeline p(graphene(), settings_for(0.2, -8.0, 16.0, 50));
  const auto est = mc_estimate(p, {1, 2, 1, false}, {});
  EXPECT_FALSE(est.variance_available);
}

TEST(Mlmc, SingleLevelEqualsMc) {
  const SamplePipeline p(graphene(), settings_for(0.1, -8.0, 16.0, 200));
  EstimatorOptions o;
  o.master_seed = 11;
  const auto mc = mc_estimate(p, {2, 4, 20, false}, o);
  const auto ml = mlmc_estimate(p, LevelPlan{{{2, 4, 20, false}}}, o);
  EXPECT_EQ(mc.mean, ml.mean);
  EXPECT_EQ(mc.variance, ml.variance);
}

TEST(Mlmc, NoDefectsReproduceFinestUnperturbed) {
  const SamplePipeline p(graphene(), settings_for(0.0, -8.0, 16.0, 300));
  const auto est = mlmc_estimate(p, LevelPlan::doubling(1, 3, 8, {4, 3, 2}), {});
  const auto reference = p.compute_quantity(8, 1, empty_configuration(p.supercell(8)));
  for (std::size_t m = 0; m < est.mean.size(); ++m) {
    EXPECT_NEAR(est.mean[m], reference[m], 1e-10);
    EXPECT_EQ(est.variance[m], 0.0);
  }
}

TEST(Mlmc, TelescopingAgainstDirectSum) {
  const SamplePipeline p(graphene(), settings_for(0.15, -8.0, 16.0, 150));
  EstimatorOptions o;
  o.master_seed = 21;
  const auto plan = LevelPlan::doubling(1, 3, 8, {6, 4, 3});
  const auto est = mlmc_estimate(p, plan, o);

  std::vector<double> direct(150, 0.0);
  std::vector<double> variance(150, 0.0);
  for (std::size_t l = 0; l < plan.levels.size(); ++l) {
    const auto& spec = plan.levels[l];
    CurveAccumulator acc(150);
    for (std::size_t m = 0; m < spec.samples; ++m) {
      const auto omega = p.draw(spec.n, {21, static_cast<std::int64_t>(l + 1), static_cast<std::int64_t>(m), 0});
      std::vector<double> y = p.compute_quantity(spec.n, spec.q, omega);
      if (l > 0) {
        const auto& part = p.partition(spec.n);
        for (int r = 1; r <= 4; ++r) {
          const auto q = p.compute_quantity(spec.n / 2, 2 * spec.q, restrict_to_subdomain(omega, part, r));
          for (std::size_t i = 0; i < y.size(); ++i) y[i] -= q[i] / 4.0;
        }
      }
      acc.add(y);
    }
    const auto mean = acc.mean();
    const auto var = acc.variance();
    for (std::size_t i = 0; i < direct.size(); ++i) {
      direct[i] += mean[i];
      variance[i] += var[i] / static_cast<double>(spec.samples);
    }
    EXPECT_EQ(est.levels[l].samples, spec.samples);
  }
  for (std::size_t i = 0; i < direct.size(); ++i) {
    EXPECT_NEAR(est.mean[i], direct[i], 1e-13);
    EXPECT_NEAR(est.variance[i], variance[i], 1e-13);
  }
}

TEST(Mlmc, EstimatorVarianceIsSumOfLevelTerms) {
  const SamplePipeline p(graphene(), settings_for(0.2, -8.0, 16.0, 120));
  const auto est = mlmc_estimate(p, LevelPlan::doubling(1, 2, 8, {8, 5}), {4});
  for (std::size_t i = 0; i < est.variance.size(); ++i) {
    double sum = 0.0;
    for (const auto& l : est.levels) sum += l.variance[i] / static_cast<double>(l.samples);
    EXPECT_EQ(est.variance[i], sum);
  }
}

TEST(ControlVariate, EmptyOutcomeFolds) {
  const SamplePipeline p(graphene(), settings_for(0.1, -8.0, 16.0, 600, 0.05));
  const auto cv = p.control_variate_sample(4, 2, empty_configuration(p.supercell(4)));
  for (std::size_t m = 0; m < cv.coarse.size(); ++m) EXPECT_NEAR((*cv.fine)[m], cv.coarse[m], 1e-10);
}

TEST(ControlVariate, UnbiasedByEnumeration) {
  for (double pv : {0.25, 0.5}) {
    const SamplePipeline p(graphene(), settings_for(pv, -8.0, 16.0, 300, 0.05));
    std::vector<double> cv_mean(300, 0.0);
    for (const auto& item : enumerate_configs(p.supercell(2), pv)) {
      const auto cv = p.control_variate_sample(2, 4, item.config);
      for (std::size_t m = 0; m < cv_mean.size(); ++m) cv_mean[m] += item.weight * cv.coarse[m];
    }
    const auto coarse = exhaustive_level(p, 1, 8, {});
    for (std::size_t m = 0; m < cv_mean.size(); ++m) EXPECT_NEAR(cv_mean[m], coarse.mean[m], 1e-10);
  }
}

TEST(ControlVariate, ReducesVariance) {
  const SamplePipeline p(graphene(), settings_for(0.0625, -8.0, 16.0, 512, 0.05));
  EstimatorOptions o;
  o.master_seed = 8;
  o.window_lo = -6.0;
  o.window_hi = 4.0;
  const auto stats = size_statistics(p, 8, 2, 200, o);
  ASSERT_TRUE(stats.mean_diff_variance.has_value());
  EXPECT_LT(*stats.mean_diff_variance, stats.mean_q_variance);
}

TEST(Exhaustive, ClosesToOneStatePerCell) {
  const SamplePipeline p(graphene(), settings_for(0.5, -8.0, 16.0, 100, 0.05));
  const auto level = exhaustive_level(p, 1, 4, {});
  EXPECT_EQ(level.samples, 4u);
  EXPECT_NEAR(level.mean.back(), 1.0, 1e-12);
  EXPECT_EQ(level.mean.front(), 0.0);
  // terminal value takes 0, 1 or 2 with weights 1/4, 1/2, 1/4
  EXPECT_NEAR(level.variance.back(), 0.5, 1e-12);
  for (double v : level.estimator_variance) EXPECT_EQ(v, 0.0);
}

TEST(Exhaustive, AsFirstLevel) {
  const SamplePipeline p(graphene(), settings_for(0.1, -8.0, 16.0, 100, 0.05));
  LevelPlan plan = LevelPlan::doubling(1, 2, 8, {1, 6});
  plan.levels[0].exhaustive = true;
  const auto est = mlmc_estimate(p, plan, {2});
  EXPECT_TRUE(est.levels[0].exhaustive);
  EXPECT_EQ(est.levels[0].samples, 256u);
  for (std::size_t i = 0; i < est.variance.size(); ++i)
    EXPECT_EQ(est.variance[i], est.levels[1].variance[i] / 6.0);
}

TEST(Cache, OnOffBitIdentical) {
  auto settings = settings_for(0.05, -8.0, 16.0, 400, 0.05);
  const SamplePipeline cached(graphene(), settings);
  settings.use_cache = false;
  const SamplePipeline uncached(graphene(), settings);
  EstimatorOptions o;
  o.master_seed = 99;
  const auto a = mc_estimate(cached, {2, 4, 500, false}, o);
  const auto b = mc_estimate(uncached, {2, 4, 500, false}, o);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
  EXPECT_GT(a.levels[0].cache_hits, 300u);
  EXPECT_EQ(b.levels[0].cache_hits, 0u);
}

TEST(Determinism, WorkerCountDoesNotChangeResults) {
  const SamplePipeline p(graphene(), settings_for(0.1, -8.0, 16.0, 200, 0.05));
  std::vector<MlmcEstimate> runs;
  for (int workers : {1, 3, 8}) {
    EstimatorOptions o;
    o.master_seed = 1234;
    o.workers = workers;
    o.batch_size = 5;
    runs.push_back(mlmc_estimate(p, LevelPlan::doubling(1, 2, 8, {12, 7}), o));
  }
  for (const auto& r : runs) {
    EXPECT_EQ(r.mean, runs[0].mean);
    EXPECT_EQ(r.variance, runs[0].variance);
  }
}

TEST(SizeStatistics, OddSizeHasNoControlVariate) {
  const SamplePipeline p(graphene(), settings_for(0.1, -8.0, 16.0, 100, 0.05));
  const auto s = size_statistics(p, 3, 2, 5, {});
  EXPECT_FALSE(s.diff_variance.has_value());
  EXPECT_GT(s.fine_time_per_sample, 0.0);
  EXPECT_THROW(size_statistics(p, 2, 2, 1, {}), ConfigError);
}

} // namespace
} // namespace defectmc
