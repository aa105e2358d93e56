#include "defectmc/lattice.hpp"

#include "defectmc/error.hpp"

#include <cmath>
#include <numbers>

namespace defectmc {

std::string to_string(SiteRole role) { return role == SiteRole::A ? "A" : "B"; }

SiteRole parse_role(const std::string& text) {
  if (text == "A" || text == "a") return SiteRole::A;
  if (text == "B" || text == "b") return SiteRole::B;
  throw ConfigError("unknown site role '" + text + "' (expected A or B)");
}

LatticeSpec LatticeSpec::honeycomb(double lattice_constant) {
  const double h = std::numbers::sqrt3 / 2.0;
  LatticeSpec spec;
  spec.a1 = lattice_constant * Vec2(h, 0.5);
  spec.a2 = lattice_constant * Vec2(h, -0.5);
  spec.basis = {
      BasisSite{Vec2(0.0, 0.0), SiteRole::A, 1, true},
      BasisSite{Vec2(1.0 / 3.0, 1.0 / 3.0), SiteRole::B, 1, true},
  };
  return spec;
}

double LatticeSpec::cell_area() const { return std::abs(a1.x() * a2.y() - a1.y() * a2.x()); }

Vec2 LatticeSpec::position(int i, int j, std::size_t basis_index) const {
  const Vec2& f = basis[basis_index].fractional;
  return (i + f.x()) * a1 + (j + f.y()) * a2;
}

std::array<Vec2, 2> LatticeSpec::reciprocal() const {
  const double det = a1.x() * a2.y() - a1.y() * a2.x();
  const double c = 2.0 * std::numbers::pi / det;
  return {Vec2(c * a2.y(), -c * a2.x()), Vec2(-c * a1.y(), c * a1.x())};
}

int LatticeSpec::orbitals_per_cell() const {
  int total = 0;
  for (const auto& site : basis) total += site.orbitals;
  return total;
}

void LatticeSpec::validate() const {
  if (!a1.allFinite() || !a2.allFinite())
    throw ConfigError("lattice vectors must be finite");
  const double scale = a1.norm() * a2.norm();
  if (scale == 0.0 || cell_area() <= 1e-12 * scale)
    throw ConfigError("lattice vectors a1, a2 are linearly dependent");
  if (basis.empty()) throw ConfigError("lattice basis is empty");
  for (const auto& site : basis) {
    if (site.orbitals < 0) throw ConfigError("negative orbital count");
  }
}

Supercell::Supercell(LatticeSpec spec, int n) : spec_(std::move(spec)), n_(n) {
  if (n < 1) throw ConfigError("supercell factor n must be >= 1, got " + std::to_string(n));
  spec_.validate();
  const std::size_t nb = spec_.basis.size();
  sites_.reserve(static_cast<std::size_t>(n) * n * nb);
  unit_of_site_.reserve(sites_.capacity());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (std::size_t b = 0; b < nb; ++b) {
        sites_.push_back({i, j, b, spec_.position(i, j, b), orbital_count_});
        orbital_count_ += static_cast<std::size_t>(spec_.basis[b].orbitals);
        if (spec_.basis[b].removable) {
          unit_of_site_.push_back(units_.size());
          units_.push_back({sites_.size() - 1});
        } else {
          unit_of_site_.push_back(npos);
        }
      }
    }
  }
}

std::size_t Supercell::site_index(int i, int j, std::size_t basis) const {
  const std::size_t nb = spec_.basis.size();
  return (static_cast<std::size_t>(i) * n_ + static_cast<std::size_t>(j)) * nb + basis;
}

Supercell build_supercell(const LatticeSpec& spec, int n) { return Supercell(spec, n); }

Vec2 PartitionMap::translation(int label) const {
  const auto& off = offsets.at(static_cast<std::size_t>(label - 1));
  return static_cast<double>(off[0]) * parent.spec().a1 + static_cast<double>(off[1]) * parent.spec().a2;
}

PartitionMap partition_quarters(const Supercell& parent) {
  const int n = parent.n();
  if (n % 2 != 0)
    throw ConfigError("supercell factor " + std::to_string(n) + " is not divisible by 2");
  const int h = n / 2;
  PartitionMap map{parent, Supercell(parent.spec(), h), {}, {}, {}};
  map.offsets = {{{0, 0}, {h, 0}, {0, h}, {h, h}}};
  map.assignment.resize(parent.sites().size());
  map.sub_site.resize(parent.sites().size());
  for (std::size_t s = 0; s < parent.sites().size(); ++s) {
    const auto& site = parent.sites()[s];
    const int hi = site.i >= h ? 1 : 0;
    const int hj = site.j >= h ? 1 : 0;
    map.assignment[s] = 1 + hi + 2 * hj;
    map.sub_site[s] = map.subcell.site_index(site.i - hi * h, site.j - hj * h, site.basis);
  }
  return map;
}

} // namespace defectmc
