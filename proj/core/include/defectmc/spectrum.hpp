#pragma once

#include "defectmc/tbmodel.hpp"

#include <iosfwd>
#include <vector>

namespace defectmc {

enum class BzMode {
  Reduced, // one rhombus
  Full,    // the rhombus and its two 120-degree rotations
};

std::string to_string(BzMode mode);
BzMode parse_bz_mode(const std::string& text);

/// Brillouin-zone quadrature for an n x n supercell: the rhombus spanned by
/// b1/n, b2/n split into q x q sub-rhombi with one corner point each.
struct BzGrid {
  int n = 1;
  int q = 1;
  BzMode mode = BzMode::Reduced;
  std::vector<Vec2> kpoints;
  std::vector<double> weights; // uniform, sum to 1
};

BzGrid make_bz_grid(const LatticeSpec& lattice, int n, int q, BzMode mode = BzMode::Reduced);

/// Ascending generalized eigenvalues for every k-point of a grid.
struct BandGrid {
  std::vector<Vec2> kpoints;
  std::vector<double> weights;
  std::vector<std::vector<double>> energies; // [k][band], eV

  std::size_t band_count() const { return energies.empty() ? 0 : energies.front().size(); }
  bool empty() const { return energies.empty() || band_count() == 0; }
};

/// Eigenvalues of H u = e S u in ascending order. Uses a real symmetric
/// solver when both matrices are exactly real.
std::vector<double> solve_generalized(const BlochOperatorPair& pair);

BandGrid solve_bands(const TightBindingModel& model, const Supercell& supercell,
                     const DefectConfiguration& defects, const BzGrid& grid);

/// Predicted cost of one sample in units of a single-orbital 1x1 dense
/// solve: (n^2 * orbitals)^3 per k-point times the k-point count.
double estimate_solve_cost(int n, int q, int orbitals_per_cell, BzMode mode = BzMode::Reduced);

/// Seconds-per-unit calibration of estimate_solve_cost from one measurement.
struct SolveCostModel {
  double seconds_per_unit = 0.0;

  static SolveCostModel calibrate(double measured_seconds, int n, int q, int orbitals_per_cell,
                                  BzMode mode = BzMode::Reduced);
  double predict_seconds(int n, int q, int orbitals_per_cell, BzMode mode = BzMode::Reduced) const;
};

/// CSV with header "kx,ky,band,energy".
void write_band_csv(std::ostream& out, const BandGrid& bands);

} // namespace defectmc
