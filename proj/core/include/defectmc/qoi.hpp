#pragma once

#include "defectmc/spectrum.hpp"

#include <span>
#include <vector>

namespace defectmc {

/// Smoothed step replacing the indicator of (-inf, 0): 1 for x <= -1,
/// 0 for x >= 1, and the cubic 1/2 - 9/8 x + 5/8 x^3 in between. The
/// cubic matches the indicator's zeroth and first moments on [-1, 1].
double smoothing_g(double x);

/// Uniform energy discretization e_m = start + m * step, m = 0..points-1.
struct EnergyGrid {
  double start = 0.0;
  double step = 1.0;
  std::size_t points = 0;

  double at(std::size_t m) const { return start + static_cast<double>(m) * step; }
  double stop() const { return at(points - 1); }

  /// `points` nodes spanning [lo, hi] inclusive.
  static EnergyGrid spanning(double lo, double hi, std::size_t points);
  /// Nodes lo, lo + step, ... up to the first node >= hi.
  static EnergyGrid with_step(double lo, double hi, double step);

  friend bool operator==(const EnergyGrid&, const EnergyGrid&) = default;
};

/// Width of the smoothed step in eV. A width of zero selects the sharp
/// indicator, kept for oracle comparisons.
struct SmoothingSpec {
  double delta = 0.01;

  static SmoothingSpec sharp() { return {0.0}; }
  bool is_sharp() const { return delta == 0.0; }
};

struct IdosCurve {
  EnergyGrid grid;
  std::vector<double> values; // states per unit area below e_m
};

/// Adds (scale / area) * sum_k w_k sum_n g((E_n(k) - e_m) / delta) to `out`.
void accumulate_idos(const BandGrid& bands, const EnergyGrid& grid, const SmoothingSpec& smoothing,
                     double area, std::span<double> out);

IdosCurve idos(const BandGrid& bands, const EnergyGrid& grid, const SmoothingSpec& smoothing, double area);

/// Central differences with half-width delta_e (an integer multiple of the
/// grid step); one-sided differences where the stencil leaves the grid.
std::vector<double> dos_by_differentiation(const IdosCurve& curve, double delta_e);

/// Arithmetic mean of values at grid nodes inside [lo, hi]. Falls back to
/// the whole grid when no node is inside.
double window_mean(const EnergyGrid& grid, std::span<const double> values, double lo, double hi);

} // namespace defectmc
