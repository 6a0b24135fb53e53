#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "btransport/measures.hpp"

using namespace btransport;

// Reference values from tests/oracle/derive_oracles.py (mpmath, 40 digits).
constexpr double kGaussCdf1 = 0.84134474606854295;
constexpr double kGaussMassPm1 = 0.6826894921370859;
constexpr double kCostQuarterToOneAt0 = 0.19947114020071634;

TEST(Measures, GaussianCdf) {
    const auto g = gaussian(1.0);
    EXPECT_DOUBLE_EQ(cdf(g, 0.0), 0.5);
    EXPECT_NEAR(cdf(g, 1.0), kGaussCdf1, 1e-12);
}

TEST(Measures, CdfByQuadratureMatchesClosedForm) {
    DensityParts p = gaussian(1.0).parts();
    p.cdf = nullptr;
    const DensityMeasure g(std::move(p));
    for (double x : {-2.0, -0.3, 0.0, 1.0, 2.5}) EXPECT_NEAR(g.cdf(x), normal::cdf(x), 1e-10) << x;
}

TEST(Measures, UniformCdf) { EXPECT_DOUBLE_EQ(cdf(uniform(-1, 1), 0.5), 0.75); }

TEST(Measures, MeanVar) {
    const auto a = mean_var(gaussian(0.25));
    EXPECT_NEAR(a.mean, 0.0, 1e-12);
    EXPECT_NEAR(a.variance, 0.25, 1e-10);
    const auto u = mean_var(uniform(-1, 1));
    EXPECT_NEAR(u.mean, 0.0, 1e-12);
    EXPECT_NEAR(u.variance, 1.0 / 3.0, 1e-12);
    const auto t = mean_var(triangle(0.7, 1e-4));
    EXPECT_NEAR(t.mean, 0.7, 1e-12);
    EXPECT_LT(t.variance, 1e-8);
}

TEST(Measures, PhiOfNarrowMass) {
    const auto d = triangle(0.0, 1e-5);
    EXPECT_NEAR(phi(d, 1.0), 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(phi(d, -1.0), 0.0);
    EXPECT_DOUBLE_EQ(phi(d, -1e300), 0.0);
}

TEST(Measures, PhiUniformClosedForm) {
    const auto u = uniform(-1, 1);
    for (double x : {-0.5, 0.0, 0.25, 0.9}) EXPECT_NEAR(phi(u, x), (x + 1) * (x + 1) / 4, 1e-12) << x;
    EXPECT_NEAR(phi(u, 2.0), 2.0, 1e-12);
}

TEST(Measures, PhiTwoFormsAgree) {
    const auto m = mixture({{0.3, gaussian(0.5, -1.0)}, {0.7, uniform(-0.5, 2.0)}});
    for (double x : {-3.0, -1.0, 0.0, 0.7, 1.9, 4.0}) EXPECT_NEAR(phi(m, x), phi_moment_form(m, x), 1e-9) << x;
}

TEST(Measures, CostIdenticalIsZero) {
    const auto g = gaussian(1.0);
    for (double x : {-2.0, 0.0, 1.5}) EXPECT_NEAR(cost(g, g, x), 0.0, 1e-12);
}

TEST(Measures, CostGaussianHeatIntegral) {
    EXPECT_NEAR(cost(gaussian(0.25), gaussian(1.0), 0.0), kCostQuarterToOneAt0, 1e-9);
}

TEST(Measures, CostDecaysInTails) {
    const CostFunction c(gaussian(0.25), gaussian(1.0));
    EXPECT_LT(std::abs(c(9.0)), 1e-9);
    EXPECT_LT(std::abs(c(-9.0)), 1e-9);
}

TEST(Measures, CostRejectsMeanMismatch) {
    EXPECT_THROW(CostFunction(gaussian(1.0), gaussian(1.0, 0.5)), PreconditionError);
}

TEST(Measures, GammaCenterSymmetricIsIdentity) {
    const auto g = gamma_center(gaussian(1.0));
    EXPECT_NEAR(g.c, 1.0, 1e-10);
    EXPECT_NEAR(g.d, 1.0, 1e-10);
}

TEST(Measures, GammaCenterTwoBumps) {
    // 0.25 near -1, 0.75 near +1: c = 2, d = 2/3.
    const auto m = mixture({{0.25, triangle(-1.0, 1e-3)}, {0.75, triangle(1.0, 1e-3)}});
    const auto g = gamma_center(m);
    EXPECT_NEAR(g.c, 2.0, 1e-9);
    EXPECT_NEAR(g.d, 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(g.measure.cdf(0.0), 0.5, 1e-9);
    const auto mv = mean_var(g.measure);
    EXPECT_NEAR(mv.mean, 0.0, 1e-10);
    EXPECT_NEAR(g.measure.total_mass(), 1.0, 1e-10);
}

TEST(Measures, GammaCenterOneSidedThrows) { EXPECT_THROW(gamma_center(uniform(0.1, 1.0)), PreconditionError); }

TEST(Measures, GammaCenterTrendInR) {
    // c, d -> 1 as the truncation grows, for a centered but skewed measure.
    const auto m = mixture({{0.5, gaussian(0.5, -0.5)}, {0.5, gaussian(2.0, 0.5)}});
    double prev = 1e9;
    for (double R : {2.0, 3.0, 4.0, 5.0}) {
        const auto g = gamma_center(truncate_normalize(m, R));
        const double dev = std::abs(g.c - 1.0) + std::abs(g.d - 1.0);
        EXPECT_LT(dev, prev) << R;
        prev = dev;
    }
}

TEST(Measures, TruncateNormalize) {
    const auto u = truncate_normalize(uniform(-2, 2), 1.0);
    EXPECT_NEAR(u.total_mass(), 1.0, 1e-12);
    EXPECT_NEAR(u.density(0.3), 0.5, 1e-12);
    const auto g = truncate_normalize(gaussian(1.0), 1.0);
    EXPECT_NEAR(g.density(0.0), normal::pdf(0.0) / kGaussMassPm1, 1e-12);
    EXPECT_THROW(truncate_normalize(gaussian(1.0), 0.0), PreconditionError);
}

TEST(Measures, Feasibility) {
    std::vector<double> grid;
    for (int i = -40; i <= 40; ++i) grid.push_back(i * 0.1);
    EXPECT_FALSE(feasibility_check(uniform(-1, 1), uniform(-0.5, 0.5), grid).feasible());
    const auto ok = feasibility_check(gaussian(0.5), gaussian(1.0), grid);
    EXPECT_TRUE(ok.feasible());
    EXPECT_GT(ok.min_cost, 0.0);
    const auto same = feasibility_check(uniform(-1, 1), uniform(-1, 1), grid);
    EXPECT_TRUE(same.feasible());
    EXPECT_NEAR(same.min_cost, 0.0, 1e-12);
}

TEST(Measures, NegativeDensityRejected) {
    DensityParts p;
    p.density = [](double x) { return x; };
    p.support = {-1, 1};
    EXPECT_THROW(DensityMeasure{p}, PreconditionError);
}
