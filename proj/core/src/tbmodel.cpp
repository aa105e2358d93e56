#include "defectmc/tbmodel.hpp"

#include "defectmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace defectmc {

namespace {

using CouplingKey = std::tuple<int, int, std::size_t, int, std::size_t, int>;

CouplingKey key_of(const Coupling& c) {
  return {c.di, c.dj, c.src_basis, c.src_orbital, c.dst_basis, c.dst_orbital};
}

std::string describe(const Coupling& c) {
  std::ostringstream os;
  os << "(" << c.di << "," << c.dj << ") " << c.src_basis << ":" << c.src_orbital << " -> "
     << c.dst_basis << ":" << c.dst_orbital;
  return os.str();
}

void validate_couplings(const std::vector<Coupling>& list, const LatticeSpec& lattice,
                        const char* what) {
  std::map<CouplingKey, Complex> table;
  for (const auto& c : list) {
    if (std::abs(c.di) > kMaxCouplingRange || std::abs(c.dj) > kMaxCouplingRange)
      throw ConfigError(std::string(what) + " coupling " + describe(c) + " exceeds range " +
                        std::to_string(kMaxCouplingRange));
    if (c.src_basis >= lattice.basis.size() || c.dst_basis >= lattice.basis.size())
      throw ConfigError(std::string(what) + " coupling " + describe(c) + " names unknown basis site");
    if (c.src_orbital < 0 || c.src_orbital >= lattice.basis[c.src_basis].orbitals ||
        c.dst_orbital < 0 || c.dst_orbital >= lattice.basis[c.dst_basis].orbitals)
      throw ConfigError(std::string(what) + " coupling " + describe(c) + " names unknown orbital");
    if (c.di == 0 && c.dj == 0 && c.src_basis == c.dst_basis && c.src_orbital == c.dst_orbital)
      throw ConfigError(std::string(what) + " coupling " + describe(c) +
                        " is diagonal; use the on-site block");
    if (!std::isfinite(c.amplitude.real()) || !std::isfinite(c.amplitude.imag()))
      throw ConfigError(std::string(what) + " coupling " + describe(c) + " is not finite");
    if (!table.emplace(key_of(c), c.amplitude).second)
      throw ConfigError(std::string(what) + " coupling " + describe(c) + " listed twice");
  }
  for (const auto& c : list) {
    const CouplingKey reverse{-c.di, -c.dj, c.dst_basis, c.dst_orbital, c.src_basis, c.src_orbital};
    const auto it = table.find(reverse);
    const double scale = std::max(1.0, std::abs(c.amplitude));
    if (it == table.end() || std::abs(it->second - std::conj(c.amplitude)) > 1e-12 * scale)
      throw ConfigError(std::string(what) + " coupling " + describe(c) +
                        " has no Hermitian-conjugate partner");
  }
}

} // namespace

void TightBindingModel::validate() const {
  lattice.validate();
  if (onsite.size() != lattice.basis.size())
    throw ConfigError("on-site table does not match the lattice basis");
  for (std::size_t b = 0; b < onsite.size(); ++b) {
    if (onsite[b].size() != static_cast<std::size_t>(lattice.basis[b].orbitals))
      throw ConfigError("on-site energies for basis site " + std::to_string(b) +
                        " do not match its orbital count");
  }
  validate_couplings(hopping, lattice, "hopping");
  if (overlap) validate_couplings(*overlap, lattice, "overlap");
}

void GrapheneNNModel::validate() const {
  if (!std::isfinite(eps_2p) || !std::isfinite(t) || !std::isfinite(s))
    throw ConfigError("graphene parameters must be finite");
  if (std::abs(3.0 * s) >= 1.0)
    throw ConfigError("graphene overlap requires |3s| < 1 for a positive-definite S(k)");
}

TightBindingModel GrapheneNNModel::build(double lattice_constant) const {
  return build(LatticeSpec::honeycomb(lattice_constant));
}

TightBindingModel GrapheneNNModel::build(const LatticeSpec& lattice) const {
  validate();
  if (lattice.basis.size() != 2)
    throw ConfigError("graphene model needs a two-site honeycomb basis");
  TightBindingModel model;
  std::ostringstream id;
  id.precision(17);
  id << "graphene-nn eps=" << eps_2p << " t=" << t << " s=" << s;
  model.id = id.str();
  model.lattice = lattice;
  for (auto& site : model.lattice.basis) {
    site.orbitals = 1;
    site.removable = true;
  }
  model.onsite = {{eps_2p}, {eps_2p}};
  // A in cell (0,0) has its three B neighbours in cells (0,0), (-1,0), (0,-1).
  const std::array<std::array<int, 2>, 3> neighbours{{{0, 0}, {-1, 0}, {0, -1}}};
  std::vector<Coupling> hop;
  std::vector<Coupling> ovl;
  for (const auto& d : neighbours) {
    hop.push_back({d[0], d[1], 0, 0, 1, 0, Complex(t, 0.0)});
    hop.push_back({-d[0], -d[1], 1, 0, 0, 0, Complex(t, 0.0)});
    ovl.push_back({d[0], d[1], 0, 0, 1, 0, Complex(s, 0.0)});
    ovl.push_back({-d[0], -d[1], 1, 0, 0, 0, Complex(s, 0.0)});
  }
  model.hopping = std::move(hop);
  model.overlap = std::move(ovl);
  model.validate();
  return model;
}

TightBindingModel MultiOrbitalModel::build(double lattice_constant) const {
  return build(LatticeSpec::honeycomb(lattice_constant));
}

TightBindingModel MultiOrbitalModel::build(const LatticeSpec& lattice) const {
  TightBindingModel model;
  model.id = "multi-orbital";
  model.lattice = lattice;
  model.onsite.resize(lattice.basis.size());
  for (std::size_t b = 0; b < lattice.basis.size(); ++b) {
    auto& site = model.lattice.basis[b];
    const auto labels = orbitals.find(site.role);
    site.orbitals = labels == orbitals.end() ? 0 : static_cast<int>(labels->second.size());
    site.removable = std::find(removable_roles.begin(), removable_roles.end(), site.role) !=
                     removable_roles.end();
    const auto energies = onsite.find(site.role);
    model.onsite[b].assign(static_cast<std::size_t>(site.orbitals), 0.0);
    if (energies != onsite.end()) {
      for (std::size_t o = 0; o < energies->second.size() && o < model.onsite[b].size(); ++o)
        model.onsite[b][o] = energies->second[o];
    }
  }
  model.hopping = couplings;
  model.overlap = overlap;
  std::ostringstream id;
  id << "multi-orbital couplings=" << couplings.size();
  model.id = id.str();
  model.validate();
  return model;
}

BlochOperatorPair assemble_bloch(const TightBindingModel& model, const Supercell& supercell,
                                 const DefectConfiguration& defects, const Vec2& k) {
  if (!k.allFinite()) throw ConfigError("wave vector k is not finite");
  if (defects.unit_count() != supercell.unit_count() || defects.n() != supercell.n())
    throw ConfigError("defect configuration does not belong to this supercell");

  const auto& sites = supercell.sites();
  const auto& lattice = supercell.spec();
  const int n = supercell.n();

  // Row of every (site, orbital) that survives the vacancies.
  std::vector<std::ptrdiff_t> row(supercell.orbital_count(), -1);
  BlochOperatorPair pair;
  pair.k = k;
  pair.identity_overlap = model.identity_overlap();
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const std::size_t unit = supercell.unit_of_site(s);
    if (unit != Supercell::npos && defects.vacant(unit)) continue;
    const int orbitals = lattice.basis[sites[s].basis].orbitals;
    for (int o = 0; o < orbitals; ++o) {
      row[sites[s].first_orbital + static_cast<std::size_t>(o)] =
          static_cast<std::ptrdiff_t>(pair.dof_index.size());
      pair.dof_index.push_back({s, o});
    }
  }
  const auto dim = static_cast<Eigen::Index>(pair.dof_index.size());
  if (dim == 0) throw NumericalError("empty system: every orbital was removed");

  pair.H = Eigen::MatrixXcd::Zero(dim, dim);
  pair.S = Eigen::MatrixXcd::Identity(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto& dof = pair.dof_index[static_cast<std::size_t>(r)];
    pair.H(r, r) = model.onsite[sites[dof.site].basis][static_cast<std::size_t>(dof.orbital)];
  }

  auto accumulate = [&](const std::vector<Coupling>& list, Eigen::MatrixXcd& target) {
    for (std::size_t s = 0; s < sites.size(); ++s) {
      const auto& site = sites[s];
      for (const auto& c : list) {
        if (c.src_basis != site.basis) continue;
        const std::ptrdiff_t r = row[site.first_orbital + static_cast<std::size_t>(c.src_orbital)];
        if (r < 0) continue;
        const int ti = ((site.i + c.di) % n + n) % n;
        const int tj = ((site.j + c.dj) % n + n) % n;
        const auto& dst = sites[supercell.site_index(ti, tj, c.dst_basis)];
        const std::ptrdiff_t col = row[dst.first_orbital + static_cast<std::size_t>(c.dst_orbital)];
        if (col < 0) continue;
        const Vec2 shift = lattice.basis[c.dst_basis].fractional - lattice.basis[c.src_basis].fractional;
        const Vec2 displacement = (c.di * lattice.a1 + c.dj * lattice.a2) +
                                  (shift.x() * lattice.a1 + shift.y() * lattice.a2);
        const double phase = k.dot(displacement);
        target(r, col) += c.amplitude * Complex(std::cos(phase), std::sin(phase));
      }
    }
  };
  accumulate(model.hopping, pair.H);
  if (model.overlap) accumulate(*model.overlap, pair.S);

  pair.H = (0.5 * (pair.H + pair.H.adjoint())).eval();
  pair.S = (0.5 * (pair.S + pair.S.adjoint())).eval();
  return pair;
}

double hermiticity_check(const BlochOperatorPair& pair) {
  double worst = 0.0;
  if (pair.H.size() > 0) worst = (pair.H - pair.H.adjoint()).cwiseAbs().maxCoeff();
  if (pair.S.size() > 0) worst = std::max(worst, (pair.S - pair.S.adjoint()).cwiseAbs().maxCoeff());
  return worst;
}

} // namespace defectmc
