#include "defectmc/rates.hpp"

#include "defectmc/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace defectmc {

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("power-law fit needs matching x and y");
  if (x.size() < 2) throw ConfigError("power-law fit needs at least two points");
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw ConfigError("power-law fit needs positive observations (point " + std::to_string(i) + ")");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double count = static_cast<double>(x.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / count;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("power-law fit needs at least two distinct sizes");

  PowerLawFit fit;
  fit.points = x.size();
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - fit.log_prefactor - fit.exponent * lx[i];
      rss += r * r;
    }
    fit.stderr_exponent = std::sqrt(rss / (count - 2.0) / sxx);
  } else {
    fit.stderr_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

namespace {

Rate as_rate(const PowerLawFit& fit, double sign) {
  return Rate{sign * fit.exponent, fit.stderr_exponent, fit.points};
}

} // namespace

RateEstimates fit_rates(const RateObservations& obs) {
  const std::size_t count = obs.sizes.size();
  if (count < 3) throw ConfigError("rate fitting needs at least three sizes");
  if (obs.variance.size() != count || obs.work.size() != count)
    throw ConfigError("rate observations must have one variance and one work value per size");
  if (!obs.diff_variance.empty() && obs.diff_variance.size() != count)
    throw ConfigError("rate observations must have one CV-difference entry per size");
  if (!obs.bias_proxy.empty() && obs.bias_proxy.size() != count - 1)
    throw ConfigError("bias proxy needs one entry per pair of consecutive sizes");

  RateEstimates rates;
  rates.S = as_rate(fit_power_law(obs.sizes, obs.variance), -1.0);
  rates.C = as_rate(fit_power_law(obs.sizes, obs.work), 1.0);

  std::vector<double> dx;
  std::vector<double> dy;
  for (std::size_t i = 0; i < obs.diff_variance.size(); ++i) {
    if (!obs.diff_variance[i]) continue;
    dx.push_back(obs.sizes[i]);
    dy.push_back(*obs.diff_variance[i]);
  }
  if (dx.size() >= 2) rates.D = as_rate(fit_power_law(dx, dy), -1.0);

  if (obs.bias_proxy.size() >= 2) {
    std::span<const double> bx(obs.sizes.data(), count - 1);
    rates.W = as_rate(fit_power_law(bx, obs.bias_proxy), -1.0);
  }
  return rates;
}

RateObservations observations_from(const std::vector<SizeStatistics>& sizes, const EnergyGrid& grid,
                                   double window_lo, double window_hi) {
  RateObservations obs;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto& s = sizes[i];
    obs.sizes.push_back(static_cast<double>(s.n));
    obs.variance.push_back(s.mean_q_variance);
    obs.diff_variance.push_back(s.mean_diff_variance);
    obs.work.push_back(s.fine_time_per_sample);
    if (i + 1 < sizes.size()) {
      std::vector<double> diff(grid.points);
      for (std::size_t m = 0; m < grid.points; ++m) diff[m] = std::abs(s.q_mean[m] - sizes[i + 1].q_mean[m]);
      obs.bias_proxy.push_back(window_mean(grid, diff, window_lo, window_hi));
    }
  }
  return obs;
}

std::vector<std::size_t> optimal_samples(std::span<const double> V, std::span<const double> W, double tol,
                                         double theta, double c_alpha) {
  if (V.empty()) throw ConfigError("optimal_samples needs at least one level");
  if (V.size() != W.size()) throw ConfigError("optimal_samples needs one work value per variance");
  if (!(tol > 0.0) || !(theta > 0.0) || !(c_alpha > 0.0))
    throw ConfigError("tol, theta and c_alpha must be positive");
  double total = 0.0;
  for (std::size_t l = 0; l < V.size(); ++l) {
    if (!(V[l] > 0.0) || !(W[l] > 0.0))
      throw ConfigError("level " + std::to_string(l + 1) + " needs positive variance and work");
    total += std::sqrt(W[l] * V[l]);
  }
  const double scale = std::pow(c_alpha / (theta * tol), 2) * total;
  std::vector<std::size_t> M(V.size());
  for (std::size_t l = 0; l < V.size(); ++l) {
    const double m = std::ceil(scale * std::sqrt(V[l] / W[l]));
    M[l] = m < 1.0 ? 1 : static_cast<std::size_t>(m);
  }
  return M;
}

double splitting_theta(double W, double S, double C) {
  if (!(W > 0.0)) throw ConfigError("bias rate W must be positive");
  if (C <= S) throw ConfigError("MC offers no asymptotic benefit; use fixed-sample mode");
  return 1.0 / (1.0 + (C - S) / W);
}

ComplexityExponents complexity_exponents(double W, double S, double D, double C) {
  if (!(W > 0.0) || !(S > 0.0) || !(D > 0.0) || !(C > 0.0))
    throw ConfigError("complexity exponents need positive rates");
  ComplexityExponents out;
  out.fixed_samples = 2.0 * C / S;
  // one rounding each, so (1.5, 2, 3, 4) lands exactly on 10/3 and 8/3
  out.slmc = (2.0 * W + C - S) / W;
  out.mlmc = (2.0 * W + C - D) / W;
  out.sampling_regime_valid = S < 2.0 * W;
  return out;
}

SlmcComparison slmc_comparison(const MlmcEstimate& mlmc, const LevelResult& slmc, double window_lo,
                               double window_hi) {
  if (slmc.samples < 2) throw ConfigError("SLMC comparison needs at least two samples");
  SlmcComparison out;
  out.grid = mlmc.grid;
  out.mlmc_variance = mlmc.variance;
  out.slmc_variance = slmc.estimator_variance;
  const double mlmc_level = window_mean(mlmc.grid, mlmc.variance, window_lo, window_hi);
  const double slmc_level = window_mean(mlmc.grid, slmc.estimator_variance, window_lo, window_hi);
  out.rescale = mlmc_level > 0.0 ? slmc_level / mlmc_level : 1.0;
  out.rescaled_slmc = out.slmc_variance;
  for (auto& v : out.rescaled_slmc) v /= out.rescale;
  out.slmc_samples_needed = out.rescale * static_cast<double>(slmc.samples);
  out.slmc_time_per_sample = slmc.work_per_sample();
  // Summed task time on both sides, so the ratio does not depend on workers.
  out.mlmc_time_s = 0.0;
  for (const auto& level : mlmc.levels) out.mlmc_time_s += level.wall_time_s;
  out.slmc_time_needed_s = out.slmc_samples_needed * out.slmc_time_per_sample;
  out.work_ratio = out.slmc_time_needed_s > 0.0 ? out.mlmc_time_s / out.slmc_time_needed_s : 1.0;
  return out;
}

} // namespace defectmc
