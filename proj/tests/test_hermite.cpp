#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "btransport/hermite.hpp"

using namespace btransport;

TEST(Hermite, Constant) {
    const auto r = hermite_check([](double) { return 0.8; }, 40, {});
    EXPECT_NEAR(r.h0, 0.8, 1e-12);
    for (std::size_t n = 1; n < r.c.size(); ++n) EXPECT_NEAR(r.c[n], 0.0, 1e-12) << n;
    EXPECT_NEAR(r.residual, 0.0, 1e-12);
    EXPECT_LE(r.ess_sup_excess, 0.0);
}

TEST(Hermite, LinearIsFlagged) {
    const auto r = hermite_check([](double x) { return x; }, 20, {});
    EXPECT_NEAR(r.h1, 1.0, 1e-10);
}

TEST(Hermite, Quadratic) {
    // x^2 = He_2 + 1, so h0 = 1 and h2 = 2.
    const auto r = hermite_check([](double x) { return x * x; }, 20, {});
    EXPECT_NEAR(r.h0, 1.0, 1e-10);
    EXPECT_NEAR(r.h2, 2.0, 1e-10);
    EXPECT_NEAR(r.variance, 2.0, 1e-9);
    EXPECT_NEAR(r.tail, 0.0, 1e-9);
}

TEST(Hermite, StepFunctionCoefficients) {
    // E[1{X > a} He_n(X)] / sqrt(n!) = pdf(a) He_{n-1}(a) / sqrt(n!); values
    // from tests/oracle/derive_oracles.py.
    const double a = 0.3;
    const std::vector<double> bp{a};
    const auto r = hermite_check([a](double x) { return x > a ? 1.0 : 0.0; }, 40, bp);
    EXPECT_NEAR(r.c[1], 0.38138781546052409, 1e-12);
    EXPECT_NEAR(r.c[2], 0.080904573172218051, 1e-12);
    EXPECT_NEAR(r.c[5], 0.085928838829067318, 1e-12);
    EXPECT_NEAR(r.h0, 1.0 - normal::cdf(a), 1e-12);
    // Parseval: everything is accounted for by the tail estimate.
    double sum = 0;
    for (std::size_t n = 1; n < r.c.size(); ++n) sum += r.c[n] * r.c[n];
    EXPECT_NEAR(sum + r.tail, r.variance, 1e-12);
}

TEST(Hermite, SmallOrderRejected) {
    EXPECT_THROW(hermite_check([](double) { return 1.0; }, 4, {}), PreconditionError);
}
