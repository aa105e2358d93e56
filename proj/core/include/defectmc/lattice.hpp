#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace defectmc {

using Vec2 = Eigen::Vector2d;

enum class SiteRole { A, B };

std::string to_string(SiteRole role);
SiteRole parse_role(const std::string& text);

struct BasisSite {
  Vec2 fractional;       // in units of (a1, a2)
  SiteRole role = SiteRole::A;
  int orbitals = 1;
  bool removable = true; // a vacancy may remove this site
};

/// Two-dimensional Bravais lattice with a decorated basis.
struct LatticeSpec {
  Vec2 a1;
  Vec2 a2;
  std::vector<BasisSite> basis;

  /// Honeycomb lattice with a1 = a (sqrt3/2, 1/2), a2 = a (sqrt3/2, -1/2),
  /// A at fractional (0,0) and B at (1/3,1/3).
  static LatticeSpec honeycomb(double lattice_constant = 1.0);

  /// |det[a1 a2]|
  double cell_area() const;
  Vec2 position(int i, int j, std::size_t basis_index) const;
  /// Reciprocal vectors with b_i . a_j = 2 pi delta_ij.
  std::array<Vec2, 2> reciprocal() const;
  int orbitals_per_cell() const;

  /// Throws ConfigError when the primitive vectors are degenerate or the
  /// basis is empty.
  void validate() const;
};

struct SupercellSite {
  int i = 0;
  int j = 0;
  std::size_t basis = 0;
  Vec2 position;
  std::size_t first_orbital = 0; // offset in the unreduced orbital numbering
};

/// The fundamental cell extended n times along both primitive vectors.
/// Sites are ordered lexicographically by (i, j, basis index).
class Supercell {
public:
  Supercell(LatticeSpec spec, int n);

  const LatticeSpec& spec() const { return spec_; }
  int n() const { return n_; }
  const std::vector<SupercellSite>& sites() const { return sites_; }
  std::size_t site_index(int i, int j, std::size_t basis) const;

  /// Each removable unit is a group of site indices removed together.
  const std::vector<std::vector<std::size_t>>& removable_units() const { return units_; }
  std::size_t unit_count() const { return units_.size(); }
  /// Unit index of a site, or npos when the site is never removed.
  std::size_t unit_of_site(std::size_t site) const { return unit_of_site_[site]; }

  std::size_t orbital_count() const { return orbital_count_; }
  double area() const { return static_cast<double>(n_) * n_ * spec_.cell_area(); }
  double cell_count() const { return static_cast<double>(n_) * n_; }
  /// Supercell lattice vectors n*a1, n*a2.
  Vec2 A1() const { return static_cast<double>(n_) * spec_.a1; }
  Vec2 A2() const { return static_cast<double>(n_) * spec_.a2; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  LatticeSpec spec_;
  int n_;
  std::vector<SupercellSite> sites_;
  std::vector<std::vector<std::size_t>> units_;
  std::vector<std::size_t> unit_of_site_;
  std::size_t orbital_count_ = 0;
};

Supercell build_supercell(const LatticeSpec& spec, int n);

/// Split of an even supercell into four corner blocks of size n/2.
/// Label r in {1,2,3,4}: 1 = (low i, low j), 2 = (high i, low j),
/// 3 = (low i, high j), 4 = (high i, high j).
struct PartitionMap {
  static constexpr int kSubdomains = 4;

  Supercell parent;
  Supercell subcell;                  // the same n/2 cell serves every label
  std::vector<int> assignment;        // parent site -> label
  std::vector<std::size_t> sub_site;  // parent site -> site index in subcell
  std::array<std::array<int, 2>, 4> offsets; // cell offset of each label

  /// Translation taking subcell coordinates of label r to parent coordinates.
  Vec2 translation(int label) const;
};

PartitionMap partition_quarters(const Supercell& parent);

} // namespace defectmc
