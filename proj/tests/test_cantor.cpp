#include <cstdint>
#include <sstream>

#include <gtest/gtest.h>

#include "btransport/cantor.hpp"

using namespace btransport;

TEST(Cantor, DepthZero) {
    const auto K = build_cantor({0, 1}, 0);
    ASSERT_EQ(K.unit_intervals().size(), 1u);
    EXPECT_EQ(K.unit_length(), Rational(1));
}

TEST(Cantor, DepthOneRemovesMiddleQuarter) {
    const auto K = build_cantor({0, 1}, 1);
    const auto& u = K.unit_intervals();
    ASSERT_EQ(u.size(), 2u);
    EXPECT_EQ(u[0].lo, Rational(0));
    EXPECT_EQ(u[0].hi, Rational(3, 8));
    EXPECT_EQ(u[1].lo, Rational(5, 8));
    EXPECT_EQ(u[1].hi, Rational(1));
}

TEST(Cantor, TelescopingLengths) {
    for (int d = 0; d <= 12; ++d) {
        const auto K = build_cantor({0, 1}, d);
        EXPECT_EQ(K.unit_length(), cantor_length_factor(d)) << d;
        EXPECT_EQ(K.unit_length(), Rational(d + 2, 2 * (d + 1))) << d;
    }
    EXPECT_EQ(build_cantor({0, 1}, 8).unit_length(), Rational(5, 9));
}

TEST(Cantor, AmbientScaling) {
    const auto K = build_cantor({-0.6, 0.6}, 8);
    EXPECT_NEAR(K.total_length(), 1.2 * 5.0 / 9.0, 1e-14);
    EXPECT_TRUE(K.contains(-0.6));
    EXPECT_TRUE(K.contains(0.6));
    EXPECT_FALSE(K.contains(0.0));  // centre of the first removed gap
    EXPECT_NEAR(K.covered_length(-1, 1), K.total_length(), 1e-14);
}

TEST(Cantor, GapConstantsPositiveAtDepth8) {
    const auto K = build_cantor({-0.6, 0.6}, 8);
    const auto g = cantor_gap_constants(K, 10000, 42);
    EXPECT_GT(g.alpha_quadratic, 0.0);
    EXPECT_GT(g.alpha_exp, 0.0);
}

TEST(Cantor, DepthZeroHasNoGaps) {
    const auto K = build_cantor({0, 1}, 0);
    EXPECT_EQ(cantor_gap_constants(K, 100, 1).alpha_quadratic, 0.0);
}

TEST(Cantor, RemovedGapIsAllGap) {
    const auto K = build_cantor({0, 1}, 1);
    EXPECT_NEAR(K.gap_length(3.0 / 8, 5.0 / 8), 0.25, 1e-15);
}

TEST(Cantor, Preconditions) {
    EXPECT_THROW(build_cantor({1, 1}, 2), PreconditionError);
    EXPECT_THROW(build_cantor({0, 1}, -1), PreconditionError);
}

TEST(Cantor, CsvHasHeader) {
    std::ostringstream os;
    write_cantor_csv(os, build_cantor({0, 1}, 2));
    const auto s = os.str();
    EXPECT_EQ(s.find('\n') != std::string::npos, true);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 5);
}
