#include <sstream>

#include <gtest/gtest.h>

#include "btransport/lattice.hpp"

using namespace btransport;

TEST(Lattice, UniformHatMasses) {
    const auto m = discretize(uniform(-1, 1), 2);
    EXPECT_EQ(m.first_index(), -2);
    EXPECT_EQ(m.last_index(), 2);
    const double expect[] = {0.125, 0.25, 0.25, 0.25, 0.125};
    for (long k = -2; k <= 2; ++k) EXPECT_NEAR(m.at(k), expect[k + 2], 1e-13) << k;
}

TEST(Lattice, NarrowMassLandsOnItsCell) {
    const auto m = discretize(triangle(3.0 / 8.0, 1e-6), 8);
    // Hat weight 1 - n|dx| averaged over the triangle: 1 - n w / 3.
    EXPECT_NEAR(m.at(3), 1.0 - 8.0 * 1e-6 / 3.0, 1e-9);
    EXPECT_NEAR(m.total(), 1.0, 1e-9);
}

TEST(Lattice, DiscretizePreservesMassAndMean) {
    const auto m = discretize(truncate_normalize(gaussian(0.5), 4.0), 50);
    EXPECT_NEAR(m.total(), 1.0, 1e-10);
    EXPECT_NEAR(m.mean(), 0.0, 1e-10);
    // The hat kernel adds 1/(6 n^2) to the variance.
    const double v = mean_var(truncate_normalize(gaussian(0.5), 4.0)).variance;
    EXPECT_NEAR(m.variance(), v + 1.0 / (6.0 * 50 * 50), 1e-9);
}

TEST(Lattice, PhiPointMass) {
    const LatticeMeasure d(1, 0, {1.0});
    EXPECT_DOUBLE_EQ(phi_lattice_index(d, 2), 2.0);
    EXPECT_DOUBLE_EQ(phi_lattice_index(d, -1), 0.0);
}

TEST(Lattice, PhiHalfMasses) {
    const LatticeMeasure h(1, -1, {0.5, 0.0, 0.5});
    EXPECT_DOUBLE_EQ(phi_lattice_index(h, 0), 0.5);
    const LatticeMeasure d(1, 0, {1.0});
    const auto prof = lattice_cost_profile(d, h, -1, 1);
    EXPECT_DOUBLE_EQ(prof[0], 0.0);
    EXPECT_DOUBLE_EQ(prof[1], 0.5);
    EXPECT_DOUBLE_EQ(prof[2], 0.0);
}

TEST(Lattice, IdenticalMeasuresZeroCost) {
    const LatticeMeasure a(3, -2, {0.1, 0.4, 0.2, 0.3});
    for (double v : lattice_cost_profile(a, a, -4, 3)) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Lattice, CsvRoundTrip) {
    const LatticeMeasure a(4, -3, {0.125, 0.375, 0.25, 0.25});
    std::stringstream ss;
    write_lattice_csv(ss, a);
    const auto b = read_lattice_csv(ss);
    EXPECT_EQ(b.mesh(), 4);
    EXPECT_EQ(b.first_index(), -3);
    ASSERT_EQ(b.size(), a.size());
    for (long k = -3; k <= 0; ++k) EXPECT_DOUBLE_EQ(b.at(k), a.at(k));
}

TEST(Lattice, CsvRejectsGarbage) {
    std::stringstream ss("foo\n1,2,3\n");
    EXPECT_THROW(read_lattice_csv(ss), PreconditionError);
}

TEST(Lattice, UnboundedSupportRejected) { EXPECT_THROW(discretize(gaussian(1.0), 10), PreconditionError); }
