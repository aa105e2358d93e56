#pragma once

#include "defectmc/defects.hpp"
#include "defectmc/lattice.hpp"

#include <Eigen/Core>

#include <complex>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace defectmc {

using Complex = std::complex<double>;

/// Matrix element <src orbital, cell c | op | dst orbital, cell c + (di, dj)>.
struct Coupling {
  int di = 0;
  int dj = 0;
  std::size_t src_basis = 0;
  int src_orbital = 0;
  std::size_t dst_basis = 0;
  int dst_orbital = 0;
  Complex amplitude;
};

inline constexpr int kMaxCouplingRange = 3;

/// Generic tight-binding model on a decorated lattice. Hopping and overlap
/// lists must be closed under Hermitian conjugation; an absent overlap list
/// means S(k) is the identity.
struct TightBindingModel {
  std::string id;
  LatticeSpec lattice;
  std::vector<std::vector<double>> onsite; // [basis][orbital], eV
  std::vector<Coupling> hopping;           // eV
  std::optional<std::vector<Coupling>> overlap;

  bool identity_overlap() const { return !overlap.has_value(); }
  void validate() const;
};

/// Nearest-neighbour pi-band graphene model with non-orthogonal overlap.
struct GrapheneNNModel {
  double eps_2p = 0.0;
  double t = -3.033;
  double s = 0.129;

  /// Throws ConfigError unless |3s| < 1.
  void validate() const;
  TightBindingModel build(double lattice_constant = 1.0) const;
  TightBindingModel build(const LatticeSpec& lattice) const;
};

/// Multi-orbital honeycomb model (Mo d-block on A, S2 p-block on B style)
/// whose parameters come from a coupling table.
struct MultiOrbitalModel {
  std::map<SiteRole, std::vector<std::string>> orbitals;
  std::vector<SiteRole> removable_roles;
  std::map<SiteRole, std::vector<double>> onsite;
  std::vector<Coupling> couplings; // basis indices: 0 = A, 1 = B
  std::optional<std::vector<Coupling>> overlap;

  TightBindingModel build(double lattice_constant = 1.0) const;
  TightBindingModel build(const LatticeSpec& lattice) const;
};

/// Parses the versioned coupling-table text format (see README). Errors
/// carry the offending line number.
MultiOrbitalModel parse_coupling_table(std::istream& in, const std::string& source = "<stream>");
MultiOrbitalModel load_coupling_table(const std::string& path);

struct DofRef {
  std::size_t site = 0;
  int orbital = 0;
};

struct BlochOperatorPair {
  Vec2 k;
  Eigen::MatrixXcd H;
  Eigen::MatrixXcd S;
  bool identity_overlap = false;
  std::vector<DofRef> dof_index; // matrix row -> (site, orbital)
};

/// Bloch Hamiltonian and overlap of the defected supercell at wave vector k.
/// Every periodic image within coupling range contributes with the phase of
/// its true displacement; rows and columns of vacant units are absent.
BlochOperatorPair assemble_bloch(const TightBindingModel& model, const Supercell& supercell,
                                 const DefectConfiguration& defects, const Vec2& k);

/// max |H - H^dagger| and |S - S^dagger| entrywise.
double hermiticity_check(const BlochOperatorPair& pair);

} // namespace defectmc
