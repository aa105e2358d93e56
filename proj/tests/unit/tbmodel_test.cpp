#include "defectmc/error.hpp"
#include "defectmc/spectrum.hpp"
#include "defectmc/tbmodel.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace defectmc {
namespace {

using testing::graphene;
using testing::random_defects;
using testing::random_k;

std::vector<double> spectrum(const TightBindingModel& m, const Supercell& sc, const DefectConfiguration& d,
                             const Vec2& k) {
  return solve_generalized(assemble_bloch(m, sc, d, k));
}

void expect_same_spectrum(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "band " << i;
}

TEST(Graphene, OverlapBoundEnforced) {
  EXPECT_THROW((GrapheneNNModel{0.0, -3.0, 0.34}.build()), ConfigError);
  EXPECT_NO_THROW((GrapheneNNModel{0.0, -3.0, 0.33}.build()));
}

TEST(Graphene, ModelShape) {
  const auto m = graphene();
  EXPECT_EQ(m.lattice.orbitals_per_cell(), 2);
  EXPECT_FALSE(m.identity_overlap());
  EXPECT_EQ(m.hopping.size(), 6u); // three bonds, both directions
}

TEST(Assembly, HermitianOnRandomDraws) {
  std::mt19937_64 rng(101);
  const auto g = graphene();
  const auto multi = load_coupling_table(testing::synthetic_table()).build();
  for (int draw = 0; draw < 100; ++draw) {
    const auto& model = draw % 2 == 0 ? g : multi;
    const int n = 1 + static_cast<int>(rng() % 4);
    const Supercell sc(model.lattice, n);
    const auto d = random_defects(rng, sc, 0.3);
    const auto pair = assemble_bloch(model, sc, d, random_k(rng, model.lattice));
    EXPECT_LE(hermiticity_check(pair), 1e-12) << "draw " << draw;
  }
}

TEST(Assembly, VacanciesDeleteRowsAndColumns) {
  const auto m = graphene();
  const Supercell sc(m.lattice, 2);
  DefectConfiguration d(2, sc.unit_count());
  d.set_vacant(3);
  d.set_vacant(4);
  const auto full = assemble_bloch(m, sc, DefectConfiguration(2, sc.unit_count()), Vec2(0.3, -0.2));
  const auto cut = assemble_bloch(m, sc, d, Vec2(0.3, -0.2));
  ASSERT_EQ(cut.H.rows(), 6);
  std::vector<Eigen::Index> keep{0, 1, 2, 5, 6, 7};
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < keep.size(); ++c) {
      EXPECT_EQ(cut.H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), full.H(keep[r], keep[c]));
      EXPECT_EQ(cut.S(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)), full.S(keep[r], keep[c]));
    }
  EXPECT_EQ(cut.dof_index[3].site, 5u);
}

TEST(Assembly, MultiOrbitalVacancyRemovesWholeSite) {
  const auto m = load_coupling_table(testing::synthetic_table()).build();
  const Supercell sc(m.lattice, 2);
  EXPECT_EQ(sc.unit_count(), 4u); // B sites only
  DefectConfiguration d(2, sc.unit_count());
  d.set_vacant(1);
  const auto pair = assemble_bloch(m, sc, d, Vec2(0.1, 0.2));
  EXPECT_EQ(pair.H.rows(), 44 - 6);
  EXPECT_TRUE(pair.identity_overlap);
}

TEST(Assembly, EmptySystemRejected) {
  const auto m = graphene();
  const Supercell sc(m.lattice, 1);
  DefectConfiguration d(1, 2);
  d.set_vacant(0);
  d.set_vacant(1);
  EXPECT_THROW(assemble_bloch(m, sc, d, Vec2::Zero()), NumericalError);
}

TEST(Assembly, GaugeInvariantUnderSupercellReciprocalShift) {
  std::mt19937_64 rng(7);
  const auto m = graphene();
  for (int n : {1, 2, 3}) {
    const Supercell sc(m.lattice, n);
    const auto b = m.lattice.reciprocal();
    for (int trial = 0; trial < 5; ++trial) {
      const auto d = random_defects(rng, sc, 0.25);
      if (d.vacancy_count() == sc.unit_count()) continue;
      const Vec2 k = random_k(rng, m.lattice);
      const Vec2 G = (b[0] * 2.0 - b[1]) / static_cast<double>(n);
      expect_same_spectrum(spectrum(m, sc, d, k), spectrum(m, sc, d, k + G), 1e-10);
    }
  }
}

TEST(Assembly, TranslatedDefectsGiveSameSpectrum) {
  std::mt19937_64 rng(8);
  const auto m = graphene();
  const int n = 3;
  const Supercell sc(m.lattice, n);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = random_defects(rng, sc, 0.3);
    if (d.vacancy_count() == sc.unit_count()) continue;
    DefectConfiguration shifted(n, sc.unit_count());
    for (std::size_t s = 0; s < sc.sites().size(); ++s) {
      const auto& site = sc.sites()[s];
      if (d.vacant(sc.unit_of_site(s)))
        shifted.set_vacant(sc.unit_of_site(sc.site_index((site.i + 1) % n, (site.j + 2) % n, site.basis)));
    }
    const Vec2 k = random_k(rng, m.lattice);
    expect_same_spectrum(spectrum(m, sc, d, k), spectrum(m, sc, shifted, k), 1e-10);
  }
}

TEST(CouplingTable, SyntheticTableLoads) {
  const auto table = load_coupling_table(testing::synthetic_table());
  EXPECT_EQ(table.orbitals.at(SiteRole::A).size(), 5u);
  EXPECT_EQ(table.orbitals.at(SiteRole::B).size(), 6u);
  const auto m = table.build();
  EXPECT_EQ(m.lattice.orbitals_per_cell(), 11);
  EXPECT_FALSE(m.lattice.basis[0].removable);
  EXPECT_TRUE(m.lattice.basis[1].removable);
}

MultiOrbitalModel parse(const std::string& text) {
  std::istringstream in(text);
  return parse_coupling_table(in, "t.tb");
}

TEST(CouplingTable, ErrorsCarryLineNumbers) {
  const std::string head = "defectmc-couplings 1\norbitals A s\norbitals B s\nhopping\n";
  try {
    parse(head + "0 0 A s B s -1.0\n");
    FAIL() << "expected a parse error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("t.tb:5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("orbitals A s\n"), ConfigError);
  EXPECT_THROW(parse("defectmc-couplings 2\n"), ConfigError);
  EXPECT_THROW(parse(head + "0 0 A px B s -1 0\n"), ConfigError);
  EXPECT_THROW(parse(head + "4 0 A s B s -1 0\n"), ConfigError);
}

TEST(CouplingTable, MissingPartnerRejectedOnBuild) {
  const std::string text = "defectmc-couplings 1\norbitals A s\norbitals B s\nremovable A B\nhopping\n"
                           "0 0 A s B s -1 0\n";
  EXPECT_THROW(parse(text).build(), ConfigError);
  EXPECT_NO_THROW(parse(text + "0 0 B s A s -1 0\n").build());
}

TEST(CouplingTable, TableGrapheneMatchesBuiltInWithoutOverlap) {
  const std::string text = "defectmc-couplings 1\norbitals A pz\norbitals B pz\nremovable A B\nhopping\n"
                           "0 0 A pz B pz -3 0\n0 0 B pz A pz -3 0\n"
                           "-1 0 A pz B pz -3 0\n1 0 B pz A pz -3 0\n"
                           "0 -1 A pz B pz -3 0\n0 1 B pz A pz -3 0\n";
  const auto m = parse(text).build();
  const auto ref = GrapheneNNModel{0.0, -3.0, 0.0}.build();
  const Supercell sc(m.lattice, 1);
  const Supercell sc_ref(ref.lattice, 1);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const Vec2 k = random_k(rng, m.lattice);
    expect_same_spectrum(spectrum(m, sc, DefectConfiguration(1, 2), k),
                         spectrum(ref, sc_ref, DefectConfiguration(1, 2), k), 1e-12);
  }
}

} // namespace
} // namespace defectmc
