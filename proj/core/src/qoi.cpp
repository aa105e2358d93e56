#include "defectmc/qoi.hpp"

#include "defectmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace defectmc {

double smoothing_g(double x) {
  if (x <= -1.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return 0.5 - 1.125 * x + 0.625 * x * x * x;
}

EnergyGrid EnergyGrid::spanning(double lo, double hi, std::size_t points) {
  if (points < 2) throw ConfigError("energy grid needs at least two points");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("energy grid range must satisfy lo < hi");
  return {lo, (hi - lo) / static_cast<double>(points - 1), points};
}

EnergyGrid EnergyGrid::with_step(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ConfigError("energy grid step must be positive");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("energy grid range must satisfy lo < hi");
  const auto intervals = static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-9));
  return {lo, step, intervals + 1};
}

void accumulate_idos(const BandGrid& bands, const EnergyGrid& grid, const SmoothingSpec& smoothing,
                     double area, std::span<double> out) {
  if (out.size() != grid.points) throw ConfigError("IDoS output size does not match the energy grid");
  if (!(area > 0.0)) throw ConfigError("area must be positive");
  if (smoothing.delta < 0.0) throw ConfigError("smoothing width must be >= 0");
  const double delta = smoothing.delta;
  const auto points = static_cast<std::ptrdiff_t>(grid.points);

  // Energies above the smoothing window contribute a full step; record it in
  // a difference array and prefix-sum once.
  std::vector<double> steps(grid.points + 1, 0.0);
  std::vector<double> window(grid.points, 0.0);

  // First node index with at(m) > e (strict) or >= e.
  auto first_above = [&](double e, bool strict) {
    auto m = static_cast<std::ptrdiff_t>(std::floor((e - grid.start) / grid.step));
    m = std::clamp<std::ptrdiff_t>(m, 0, points);
    while (m > 0 && (strict ? grid.at(static_cast<std::size_t>(m - 1)) > e
                            : grid.at(static_cast<std::size_t>(m - 1)) >= e))
      --m;
    while (m < points && (strict ? grid.at(static_cast<std::size_t>(m)) <= e
                                 : grid.at(static_cast<std::size_t>(m)) < e))
      ++m;
    return m;
  };

  for (std::size_t k = 0; k < bands.energies.size(); ++k) {
    const double w = bands.weights[k] / area;
    for (const double e : bands.energies[k]) {
      if (delta == 0.0) {
        steps[static_cast<std::size_t>(first_above(e, true))] += w;
        continue;
      }
      const std::ptrdiff_t lo = first_above(e - delta, true);
      const std::ptrdiff_t hi = first_above(e + delta, false);
      for (std::ptrdiff_t m = lo; m < hi; ++m)
        window[static_cast<std::size_t>(m)] += w * smoothing_g((e - grid.at(static_cast<std::size_t>(m))) / delta);
      steps[static_cast<std::size_t>(hi)] += w;
    }
  }
  double running = 0.0;
  for (std::size_t m = 0; m < grid.points; ++m) {
    running += steps[m];
    out[m] += running + window[m];
  }
}

IdosCurve idos(const BandGrid& bands, const EnergyGrid& grid, const SmoothingSpec& smoothing, double area) {
  if (bands.empty()) throw ConfigError("IDoS of an empty band grid");
  IdosCurve curve{grid, std::vector<double>(grid.points, 0.0)};
  accumulate_idos(bands, grid, smoothing, area, curve.values);
  return curve;
}

std::vector<double> dos_by_differentiation(const IdosCurve& curve, double delta_e) {
  const EnergyGrid& grid = curve.grid;
  if (!(delta_e >= grid.step * (1.0 - 1e-9)))
    throw ConfigError("DoS step " + std::to_string(delta_e) + " is smaller than the energy grid step " +
                      std::to_string(grid.step));
  const double ratio = delta_e / grid.step;
  const auto s = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(s)) > 1e-6 * ratio)
    throw ConfigError("DoS step must be an integer multiple of the energy grid step");
  const std::size_t points = grid.points;
  if (points <= 2 * s) throw ConfigError("DoS step exceeds half the energy grid");

  const auto& I = curve.values;
  const double h = static_cast<double>(s) * grid.step;
  std::vector<double> rho(points);
  for (std::size_t m = 0; m < points; ++m) {
    if (m < s)
      rho[m] = (I[m + s] - I[m]) / h;
    else if (m + s >= points)
      rho[m] = (I[m] - I[m - s]) / h;
    else
      rho[m] = (I[m + s] - I[m - s]) / (2.0 * h);
  }
  return rho;
}

double window_mean(const EnergyGrid& grid, std::span<const double> values, double lo, double hi) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t m = 0; m < grid.points; ++m) {
    const double e = grid.at(m);
    if (e >= lo && e <= hi) {
      sum += values[m];
      ++count;
    }
  }
  if (count == 0) {
    for (const double v : values) sum += v;
    count = values.size();
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

} // namespace defectmc
