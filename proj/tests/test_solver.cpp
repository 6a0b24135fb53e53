#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "btransport/acceptance.hpp"
#include "btransport/oracle.hpp"
#include "btransport/solver.hpp"

using namespace btransport;

namespace {

const LatticeMeasure kDelta(1, 0, {1.0});
const LatticeMeasure kHalves(1, -1, {0.5, 0.0, 0.5});
const LatticeMeasure kQuarters(1, -2, {0.25, 0.25, 0.0, 0.25, 0.25});

void expect_matches_target(const TransportSolution& sol, double tol) {
    for (long k = sol.target.first_index(); k <= sol.target.last_index(); ++k)
        EXPECT_NEAR(sol.stopped_measure.at(k), sol.target.at(k), tol) << "cell " << k;
}

}  // namespace

TEST(Solver, InitIdenticalHasZeroCost) {
    const LatticeMeasure a(2, -1, {0.25, 0.5, 0.25});
    const auto s = init_state(a, a);
    for (double v : s.phi) EXPECT_EQ(v, 0.0);
}

TEST(Solver, InitDeltaToHalves) {
    const auto s = init_state(kDelta, kHalves);
    ASSERT_EQ(s.offset, -1);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s.phi[0], 0.0);
    EXPECT_DOUBLE_EQ(s.phi[1], 0.5);
    EXPECT_DOUBLE_EQ(s.phi[2], 0.0);
}

TEST(Solver, ZeroTargetInsideSourceHullRejected) {
    const LatticeMeasure a(1, -1, {0.25, 0.5, 0.25});
    try {
        init_state(a, kHalves);
        FAIL() << "expected PreconditionError";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("cell 0"), std::string::npos) << e.what();
    }
}

TEST(Solver, MeanMismatchRejected) {
    EXPECT_THROW(init_state(kDelta, LatticeMeasure(1, 0, {0.5, 0.5})), PreconditionError);
}

TEST(Solver, NegativeCostRejected) {
    // Variance decreases: halves -> delta.
    EXPECT_THROW(init_state(LatticeMeasure(1, -1, {0.5, 0.0, 0.5}), LatticeMeasure(1, -1, {0.25, 0.5, 0.25})),
                 PreconditionError);
}

TEST(Solver, DeltaToHalvesOneStep) {
    const auto sol = solve(kDelta, kHalves);
    EXPECT_EQ(sol.diagnostics.steps, 1);
    EXPECT_DOUBLE_EQ(sol.expected_time, 1.0);
    ASSERT_EQ(sol.g_steps.size(), 3u);
    EXPECT_EQ(sol.g_steps[0], 1);
    EXPECT_EQ(sol.g_steps[1], 0);
    EXPECT_EQ(sol.g_steps[2], 1);
    EXPECT_DOUBLE_EQ(sol.q[1], 1.0);  // tie: diffuses fully, frozen afterwards
    expect_matches_target(sol, 0.0);
    const auto et = expected_time_check(sol, kDelta, kHalves);
    EXPECT_DOUBLE_EQ(et.variance_gap, 1.0);
    EXPECT_TRUE(et.pass());
}

TEST(Solver, IdenticalFreezesAtOnce) {
    const LatticeMeasure a(3, -2, {0.1, 0.2, 0.3, 0.4});
    const auto sol = solve(a, a);
    EXPECT_EQ(sol.diagnostics.steps, 0);
    EXPECT_EQ(sol.expected_time, 0.0);
    for (long g : sol.g_steps) EXPECT_EQ(g, 0);
    expect_matches_target(sol, 0.0);
}

TEST(Solver, DeltaToQuarters) {
    const auto sol = solve(kDelta, kQuarters);
    expect_matches_target(sol, 1e-9);
    EXPECT_NEAR(sol.expected_time, 2.5, 1e-9);
    const auto tr = oracle::evolve(kDelta, kQuarters, 1000);
    EXPECT_TRUE(tr.terminated);
}

TEST(Solver, StepFollowsCostRecursion) {
    // Phi_{t+1} = Phi_t - min(nu_t / 2, Phi_t) cellwise.
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
        const auto [a, b] = acceptance::detail::random_instance(rng);
        auto s = init_state(a, b);
        for (int t = 0; t < 5; ++t) {
            const auto next = step(s);
            for (std::size_t j = 0; j < s.size(); ++j) {
                const double expect = s.phi[j] - std::min(0.5 * s.live[j], s.phi[j]);
                EXPECT_NEAR(next.phi[j], expect, 1e-12 * (1.0 + s.phi[j]));
            }
            s = next;
        }
    }
}

TEST(Solver, PartialFreezeBranch) {
    // Cell with 0 < Phi < nu/2: q = 2 Phi / nu, cost reaches zero next step.
    const LatticeMeasure a(1, -1, {0.0, 1.0, 0.0});
    const LatticeMeasure b(1, -1, {0.1, 0.8, 0.1});
    auto s = init_state(a, b);
    ASSERT_NEAR(s.phi[1], 0.1, 1e-15);
    const auto next = step(s);
    ASSERT_TRUE(next.survival_q[1].has_value());
    EXPECT_NEAR(*next.survival_q[1], 0.2, 1e-15);
    EXPECT_NEAR(next.phi[1], 0.0, 1e-15);
    EXPECT_NEAR(next.live[0], 0.1, 1e-15);
    EXPECT_NEAR(next.stopped[1], 0.8, 1e-15);
    const auto sol = solve(a, b);
    expect_matches_target(sol, 1e-12);
    EXPECT_NEAR(sol.expected_time, 0.2, 1e-12);
}

TEST(Solver, MatchesOracleOnRandomSmallInstances) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> w(1, 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 200 && checked < 40; ++i) {
        std::vector<double> m(static_cast<std::size_t>(w(rng)));
        double tot = 0;
        for (auto& v : m) tot += (v = u(rng));
        for (auto& v : m) v /= tot;
        LatticeMeasure a(1, 0, m);
        // Target: one lazy smoothing step, which spreads mass but keeps the mean.
        std::vector<double> t(m.size() + 2, 0.0);
        for (std::size_t j = 0; j < m.size(); ++j) {
            t[j] += 0.25 * m[j];
            t[j + 1] += 0.5 * m[j];
            t[j + 2] += 0.25 * m[j];
        }
        LatticeMeasure b(1, -1, t);
        SolveOptions opt;
        opt.record_history = true;
        const auto sol = solve(a, b, opt);
        const auto tr = oracle::evolve(a, b, sol.diagnostics.steps + 200);
        ASSERT_TRUE(tr.terminated);
        const std::size_t T = std::min(tr.live.size(), sol.history.size());
        for (std::size_t k = 0; k < T; ++k)
            for (std::size_t j = 0; j < tr.live[k].size(); ++j) {
                EXPECT_NEAR(tr.live[k][j], sol.history[k].live[j], 1e-12);
                EXPECT_NEAR(tr.phi[k][j], sol.history[k].phi[j], 1e-12);
            }
        ++checked;
    }
    EXPECT_EQ(checked, 40);
}

TEST(Solver, RandomInstancesExactAndCoincident) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 25; ++i) {
        const auto [a, b] = acceptance::detail::random_instance(rng);
        const auto sol = solve(a, b);
        expect_matches_target(sol, 1e-9);
        EXPECT_EQ(sol.diagnostics.coincidence_violations, 0);
        EXPECT_TRUE(expected_time_check(sol, a, b).pass());
        EXPECT_TRUE(sol.diagnostics.phi_monotone);
    }
}

TEST(Solver, StepBudgetExhaustion) {
    SolveOptions opt;
    opt.max_steps = 1;
    EXPECT_THROW(solve(kDelta, kQuarters, opt), NonTerminationError);
}

TEST(Solver, ExtendFInterpolates) {
    const auto f = extend_f(solve(kDelta, kHalves));
    EXPECT_DOUBLE_EQ(f(-1.0), 1.0);
    EXPECT_DOUBLE_EQ(f(0.0), 0.0);
    EXPECT_DOUBLE_EQ(f(0.5), 0.5);
    EXPECT_DOUBLE_EQ(f(-0.5), 0.5);
}

TEST(Solver, ExtendFConstant) {
    const LatticeMeasure a(4, -1, {0.3, 0.4, 0.3});
    const auto f = extend_f(solve(a, a));
    for (double y : f.values()) EXPECT_EQ(y, 0.0);
}

TEST(Solver, SolutionCsvHasHeader) {
    std::ostringstream os;
    write_solution_csv(os, solve(kDelta, kHalves));
    EXPECT_EQ(os.str().rfind("position,g_physical,q\n", 0), 0u) << os.str();
}
