#include "defectmc/spectrum.hpp"

#include "defectmc/error.hpp"
#include "defectmc/output.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <numbers>
#include <ostream>
#include <sstream>

namespace defectmc {

namespace {

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

bool real_couplings(const TightBindingModel& model) {
  auto real = [](const std::vector<Coupling>& cs) {
    return std::all_of(cs.begin(), cs.end(), [](const Coupling& c) { return c.amplitude.imag() == 0.0; });
  };
  return real(model.hopping) && (!model.overlap || real(*model.overlap));
}

// Position of k on the q-refined supercell reciprocal lattice, reduced modulo
// the supercell reciprocal lattice; empty when k is not on it.
std::optional<std::pair<long, long>> grid_key(const Vec2& k, const Vec2& A1, const Vec2& A2, int q) {
  std::array<long, 2> key{};
  const std::array<double, 2> f{k.dot(A1) * q / (2.0 * std::numbers::pi), k.dot(A2) * q / (2.0 * std::numbers::pi)};
  for (int i = 0; i < 2; ++i) {
    const double r = std::round(f[i]);
    if (std::abs(f[i] - r) > 1e-8) return std::nullopt;
    key[i] = ((static_cast<long>(r) % q) + q) % q;
  }
  return std::pair{key[0], key[1]};
}

// True when rotating the reciprocal lattice by 120 degrees maps it onto itself.
bool has_threefold_symmetry(const LatticeSpec& lattice) {
  const auto b = lattice.reciprocal();
  Eigen::Matrix2d basis;
  basis.col(0) = b[0];
  basis.col(1) = b[1];
  for (const auto& v : b) {
    const Eigen::Vector2d coords = basis.inverse() * rotate(v, 2.0 * std::numbers::pi / 3.0);
    for (int c = 0; c < 2; ++c)
      if (std::abs(coords[c] - std::round(coords[c])) > 1e-9) return false;
  }
  return true;
}

std::string describe_k(const Vec2& k) {
  std::ostringstream os;
  os.precision(12);
  os << "k=(" << k.x() << ", " << k.y() << ")";
  return os.str();
}

template <typename Matrix>
std::vector<double> generalized_eigenvalues(const Matrix& H, const Matrix& S, bool identity_overlap,
                                            const Vec2& k) {
  using Solver = Eigen::SelfAdjointEigenSolver<Matrix>;
  Solver solver;
  if (identity_overlap) {
    solver.compute(H, Eigen::EigenvaluesOnly);
  } else {
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw NumericalError("overlap matrix S is not positive definite at " + describe_k(k));
    // C = L^-1 H L^-H
    Matrix C = H.template selfadjointView<Eigen::Lower>();
    llt.matrixL().template solveInPlace<Eigen::OnTheLeft>(C);
    llt.matrixU().template solveInPlace<Eigen::OnTheRight>(C);
    solver.compute(C, Eigen::EigenvaluesOnly);
  }
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver did not converge at " + describe_k(k) + " (dimension " +
                         std::to_string(H.rows()) + ")");
  const auto& values = solver.eigenvalues();
  return std::vector<double>(values.data(), values.data() + values.size());
}

} // namespace

std::string to_string(BzMode mode) { return mode == BzMode::Reduced ? "reduced" : "full"; }

BzMode parse_bz_mode(const std::string& text) {
  if (text == "reduced") return BzMode::Reduced;
  if (text == "full") return BzMode::Full;
  throw ConfigError("unknown Brillouin-zone mode '" + text + "' (expected reduced or full)");
}

BzGrid make_bz_grid(const LatticeSpec& lattice, int n, int q, BzMode mode) {
  if (n < 1) throw ConfigError("supercell factor n must be >= 1");
  if (q < 1) throw ConfigError("k-points per rhombus edge q must be >= 1");
  if (mode == BzMode::Full && !has_threefold_symmetry(lattice))
    throw ConfigError("full Brillouin-zone mode needs a lattice with three-fold symmetry");
  const auto b = lattice.reciprocal();
  const Vec2 step1 = b[0] / (static_cast<double>(n) * q);
  const Vec2 step2 = b[1] / (static_cast<double>(n) * q);

  BzGrid grid{n, q, mode, {}, {}};
  const int rotations = mode == BzMode::Full ? 3 : 1;
  for (int r = 0; r < rotations; ++r) {
    const double angle = 2.0 * std::numbers::pi * r / 3.0;
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        const Vec2 k = static_cast<double>(i) * step1 + static_cast<double>(j) * step2;
        grid.kpoints.push_back(r == 0 ? k : rotate(k, angle));
      }
    }
  }
  grid.weights.assign(grid.kpoints.size(), 1.0 / static_cast<double>(grid.kpoints.size()));
  return grid;
}

std::vector<double> solve_generalized(const BlochOperatorPair& pair) {
  const bool real = pair.H.imag().cwiseAbs().maxCoeff() == 0.0 &&
                    (pair.identity_overlap || pair.S.imag().cwiseAbs().maxCoeff() == 0.0);
  if (real) {
    const Eigen::MatrixXd H = pair.H.real();
    const Eigen::MatrixXd S = pair.S.real();
    return generalized_eigenvalues(H, S, pair.identity_overlap, pair.k);
  }
  return generalized_eigenvalues(pair.H, pair.S, pair.identity_overlap, pair.k);
}

BandGrid solve_bands(const TightBindingModel& model, const Supercell& supercell,
                     const DefectConfiguration& defects, const BzGrid& grid) {
  if (grid.n != supercell.n())
    throw ConfigError("k-grid built for n=" + std::to_string(grid.n) + " used on supercell n=" +
                      std::to_string(supercell.n()));
  BandGrid bands{grid.kpoints, grid.weights, {}};
  bands.energies.reserve(grid.kpoints.size());
  // With real couplings H(-k) = conj H(k), and the grid is closed under
  // k -> -k up to supercell reciprocal vectors, so partners share a spectrum.
  const bool reuse = real_couplings(model);
  const Vec2 A1 = supercell.A1();
  const Vec2 A2 = supercell.A2();
  std::map<std::pair<long, long>, std::size_t> seen;
  for (std::size_t i = 0; i < grid.kpoints.size(); ++i) {
    const Vec2& k = grid.kpoints[i];
    if (reuse) {
      const auto here = grid_key(k, A1, A2, grid.q);
      const auto partner = grid_key(-k, A1, A2, grid.q);
      if (here && partner) {
        if (const auto it = seen.find(*partner); it != seen.end()) {
          bands.energies.push_back(bands.energies[it->second]);
          continue;
        }
        seen.emplace(*here, i);
      }
    }
    bands.energies.push_back(solve_generalized(assemble_bloch(model, supercell, defects, k)));
  }
  return bands;
}

double estimate_solve_cost(int n, int q, int orbitals_per_cell, BzMode mode) {
  const double dim = static_cast<double>(n) * n * orbitals_per_cell;
  const double kpoints = static_cast<double>(q) * q * (mode == BzMode::Full ? 3.0 : 1.0);
  return dim * dim * dim * kpoints;
}

SolveCostModel SolveCostModel::calibrate(double measured_seconds, int n, int q, int orbitals_per_cell,
                                         BzMode mode) {
  return {measured_seconds / estimate_solve_cost(n, q, orbitals_per_cell, mode)};
}

double SolveCostModel::predict_seconds(int n, int q, int orbitals_per_cell, BzMode mode) const {
  return seconds_per_unit * estimate_solve_cost(n, q, orbitals_per_cell, mode);
}

void write_band_csv(std::ostream& out, const BandGrid& bands) {
  out << "kx,ky,band,energy\n";
  for (std::size_t k = 0; k < bands.kpoints.size(); ++k) {
    for (std::size_t band = 0; band < bands.energies[k].size(); ++band) {
      out << format_double(bands.kpoints[k].x()) << ',' << format_double(bands.kpoints[k].y()) << ','
          << band << ',' << format_double(bands.energies[k][band]) << '\n';
    }
  }
}

} // namespace defectmc
