#include "defectmc/error.hpp"
#include "defectmc/lattice.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace defectmc {
namespace {

TEST(Lattice, HoneycombGeometry) {
  const auto lat = LatticeSpec::honeycomb(2.0);
  EXPECT_NEAR(lat.cell_area(), 4.0 * std::sqrt(3.0) / 2.0, 1e-14);
  const auto b = lat.reciprocal();
  EXPECT_NEAR(b[0].dot(lat.a1), 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(b[0].dot(lat.a2), 0.0, 1e-12);
  EXPECT_NEAR(b[1].dot(lat.a2), 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(b[1].dot(lat.a1), 0.0, 1e-12);
  // A-B bond length a / sqrt(3)
  EXPECT_NEAR((lat.position(0, 0, 1) - lat.position(0, 0, 0)).norm(), 2.0 / std::sqrt(3.0), 1e-14);
}

TEST(Lattice, DegenerateVectorsRejected) {
  auto lat = LatticeSpec::honeycomb();
  lat.a2 = 2.0 * lat.a1;
  EXPECT_THROW(lat.validate(), ConfigError);
}

TEST(Supercell, SiteOrderAndUnits) {
  const Supercell sc(LatticeSpec::honeycomb(), 3);
  ASSERT_EQ(sc.sites().size(), 18u);
  EXPECT_EQ(sc.unit_count(), 18u);
  EXPECT_EQ(sc.orbital_count(), 18u);
  EXPECT_DOUBLE_EQ(sc.cell_count(), 9.0);
  std::size_t index = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (std::size_t b = 0; b < 2; ++b) {
        const auto& s = sc.sites()[index];
        EXPECT_EQ(s.i, i);
        EXPECT_EQ(s.j, j);
        EXPECT_EQ(s.basis, b);
        EXPECT_EQ(sc.site_index(i, j, b), index);
        EXPECT_EQ(sc.unit_of_site(index), index);
        ++index;
      }
}

TEST(Supercell, NonRemovableSitesHaveNoUnit) {
  auto lat = LatticeSpec::honeycomb();
  lat.basis[0].removable = false;
  lat.basis[0].orbitals = 5;
  lat.basis[1].orbitals = 6;
  const Supercell sc(lat, 2);
  EXPECT_EQ(sc.unit_count(), 4u);
  EXPECT_EQ(sc.orbital_count(), 44u);
  for (std::size_t s = 0; s < sc.sites().size(); ++s) {
    if (sc.sites()[s].basis == 0) EXPECT_EQ(sc.unit_of_site(s), Supercell::npos);
    else EXPECT_NE(sc.unit_of_site(s), Supercell::npos);
  }
  EXPECT_EQ(sc.sites()[1].first_orbital, 5u);
  EXPECT_EQ(sc.sites()[2].first_orbital, 11u);
}

TEST(Partition, QuartersCoverParentOnce) {
  for (int n : {2, 4, 6}) {
    const Supercell parent(LatticeSpec::honeycomb(), n);
    const auto part = partition_quarters(parent);
    EXPECT_EQ(part.subcell.n(), n / 2);
    std::array<int, 4> counts{};
    for (std::size_t s = 0; s < parent.sites().size(); ++s) {
      const int label = part.assignment[s];
      ASSERT_GE(label, 1);
      ASSERT_LE(label, 4);
      ++counts[static_cast<std::size_t>(label - 1)];
      const auto& sub = part.subcell.sites()[part.sub_site[s]];
      const Vec2 mapped = sub.position + part.translation(label);
      EXPECT_LT((mapped - parent.sites()[s].position).norm(), 1e-12);
      EXPECT_EQ(sub.basis, parent.sites()[s].basis);
    }
    for (int c : counts) EXPECT_EQ(c, n * n / 2);
  }
}

TEST(Partition, LabelsFollowCorners) {
  const Supercell parent(LatticeSpec::honeycomb(), 4);
  const auto part = partition_quarters(parent);
  EXPECT_EQ(part.assignment[parent.site_index(0, 0, 0)], 1);
  EXPECT_EQ(part.assignment[parent.site_index(3, 0, 1)], 2);
  EXPECT_EQ(part.assignment[parent.site_index(1, 2, 0)], 3);
  EXPECT_EQ(part.assignment[parent.site_index(2, 3, 1)], 4);
}

TEST(Partition, OddSupercellRejected) {
  const Supercell parent(LatticeSpec::honeycomb(), 3);
  EXPECT_THROW(partition_quarters(parent), ConfigError);
}

} // namespace
} // namespace defectmc
