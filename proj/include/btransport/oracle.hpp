#pragma once

#include <cmath>
#include <vector>

#include "lattice.hpp"

namespace btransport::oracle {

/// Reference mass evolution kept deliberately naive: the cost function is
/// recomputed from scratch every step from its defining sum, and the walk is
/// applied as an explicit W x W transition matrix. Used to cross-check the
/// incremental solver.
struct Trajectory {
    long offset = 0;
    std::vector<std::vector<double>> live;     ///< nu_t for t = 0, 1, ...
    std::vector<std::vector<double>> phi;      ///< cost before step t
    std::vector<std::vector<double>> stopped;  ///< stopped mass before step t
    bool terminated = false;
};

inline std::vector<double> cost_from_scratch(const std::vector<double>& target, const std::vector<double>& nu_tilde) {
    const std::size_t W = target.size();
    std::vector<double> phi(W, 0.0);
    for (std::size_t x = 0; x < W; ++x) {
        double s = 0.0;
        for (std::size_t z = 0; z < x; ++z) s += static_cast<double>(x - z) * (target[z] - nu_tilde[z]);
        phi[x] = std::abs(s) <= 1e-13 ? 0.0 : s;
    }
    return phi;
}

inline Trajectory evolve(const LatticeMeasure& mu0n, const LatticeMeasure& mu1n, long max_steps) {
    const auto s0 = mu0n.support();
    const auto s1 = mu1n.support();
    const long lo = std::min(s0.first, s1.first);
    const long hi = std::max(s0.second, s1.second);
    const std::size_t W = static_cast<std::size_t>(hi - lo + 1);

    std::vector<std::vector<double>> P(W, std::vector<double>(W, 0.0));  // P[to][from]
    for (std::size_t j = 0; j < W; ++j) {
        if (j > 0) P[j - 1][j] = 0.5;
        if (j + 1 < W) P[j + 1][j] = 0.5;
    }

    Trajectory tr;
    tr.offset = lo;
    std::vector<double> live = mu0n.window(lo, hi);
    const std::vector<double> target = mu1n.window(lo, hi);
    std::vector<double> stopped(W, 0.0);

    for (long t = 0; t <= max_steps; ++t) {
        std::vector<double> nu_tilde(W);
        for (std::size_t i = 0; i < W; ++i) nu_tilde[i] = live[i] + stopped[i];
        const auto phi = cost_from_scratch(target, nu_tilde);
        tr.live.push_back(live);
        tr.phi.push_back(phi);
        tr.stopped.push_back(stopped);

        bool done = true;
        for (std::size_t i = 0; i < W; ++i) done = done && live[i] == 0.0 && phi[i] == 0.0;
        if (done) {
            tr.terminated = true;
            return tr;
        }

        std::vector<double> moving(W, 0.0);
        for (std::size_t i = 0; i < W; ++i) {
            moving[i] = phi[i] > 0.5 * live[i] ? live[i] : 2.0 * phi[i];
            stopped[i] += live[i] - moving[i];
        }
        std::vector<double> next(W, 0.0);
        for (std::size_t to = 0; to < W; ++to)
            for (std::size_t from = 0; from < W; ++from) next[to] += P[to][from] * moving[from];
        live = std::move(next);
    }
    return tr;
}

}  // namespace btransport::oracle
