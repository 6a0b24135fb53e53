#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "error.hpp"
#include "lattice.hpp"
#include "piecewise_linear.hpp"

namespace btransport {

/// Everything is kept in index units (mesh 1, time step 1) on the window
/// [offset, offset + size). Physical units are recovered with the mesh n:
/// positions k/n, times t/n^2, Phi values Phi/n.
struct SolverState {
    int mesh_n = 1;
    long offset = 0;
    long t = 0;
    std::vector<double> live;     ///< nu_t
    std::vector<double> stopped;  ///< mass frozen before step t
    std::vector<double> phi;      ///< Phi_{live + stopped -> mu1}
    std::vector<std::optional<long>> frozen_at;   ///< g, in steps
    std::vector<std::optional<double>> survival_q;  ///< q at step g
    std::vector<std::optional<long>> zero_step;   ///< first t with phi_t = 0
    std::vector<double> target;   ///< mu1 on the window
    double initial_total = 0.0;
    double expected_steps = 0.0;  ///< running sum of t * (mass stopped at t)
    long last_stop_step = 0;

    [[nodiscard]] std::size_t size() const { return live.size(); }
    [[nodiscard]] long index(std::size_t i) const { return offset + static_cast<long>(i); }
    [[nodiscard]] double live_total() const {
        double s = 0.0;
        for (double v : live) s += v;
        return s;
    }
    [[nodiscard]] double stopped_total() const {
        double s = 0.0;
        for (double v : stopped) s += v;
        return s;
    }
};

struct StepDiagnostics {
    double min_phi_before_clamp = 0.0;
    double max_phi = 0.0;
    double mass_error = 0.0;
    bool phi_monotone = true;
};

inline constexpr double kPhiClamp = 1e-12;
inline constexpr double kPhiAbort = 1e-9;

namespace detail {

inline std::string cell_name(const SolverState& s, std::size_t i) {
    std::ostringstream os;
    os << "cell " << s.index(i) << " (x = " << static_cast<double>(s.index(i)) / s.mesh_n << ")";
    return os.str();
}

}  // namespace detail

/// True when mu1 is positive on every cell strictly between the extreme
/// support cells of mu0. Returns the first failing index otherwise.
inline std::optional<long> positivity_violation(const LatticeMeasure& mu0n, const LatticeMeasure& mu1n) {
    const auto [lo, hi] = mu0n.support();
    for (long k = lo + 1; k < hi; ++k)
        if (!(mu1n.at(k) > 0.0)) return k;
    return std::nullopt;
}

/// Initial state nu_0 = mu0, nothing stopped, phi = Phi_{mu0 -> mu1}.
/// Rejects instances outside the hypotheses of the termination argument.
inline SolverState init_state(const LatticeMeasure& mu0n, const LatticeMeasure& mu1n) {
    if (mu0n.mesh() != mu1n.mesh()) throw PreconditionError("init_state: meshes differ");
    const double m0 = mu0n.total();
    const double m1 = mu1n.total();
    if (!(m0 > 0.0) || !(m1 > 0.0)) throw PreconditionError("init_state: measures must have positive mass");
    if (std::abs(m0 - m1) > 1e-12 * std::max(1.0, m1)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "init_state: total masses differ (" << m0 << " vs " << m1 << ")";
        throw PreconditionError(msg.str());
    }
    if (std::abs(mu0n.mean() - mu1n.mean()) > kMeanTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "init_state: means differ (" << mu0n.mean() << " vs " << mu1n.mean() << ")";
        throw PreconditionError(msg.str());
    }
    if (const auto bad = positivity_violation(mu0n, mu1n)) {
        std::ostringstream msg;
        msg << "init_state: target has no mass at cell " << *bad << " (x = " << static_cast<double>(*bad) / mu0n.mesh()
            << ") inside the support of the source";
        throw PreconditionError(msg.str());
    }

    const auto s0 = mu0n.support();
    const auto s1 = mu1n.support();
    const long lo = std::min(s0.first, s1.first);
    const long hi = std::max(s0.second, s1.second);

    SolverState s;
    s.mesh_n = mu0n.mesh();
    s.offset = lo;
    s.live = mu0n.window(lo, hi);
    s.target = mu1n.window(lo, hi);
    s.stopped.assign(s.live.size(), 0.0);
    s.phi = lattice_cost_profile(mu0n, mu1n, lo, hi);
    s.frozen_at.assign(s.live.size(), std::nullopt);
    s.survival_q.assign(s.live.size(), std::nullopt);
    s.zero_step.assign(s.live.size(), std::nullopt);
    s.initial_total = m0;

    double scale = 1.0;
    for (double v : s.phi) scale = std::max(scale, std::abs(v));
    const double tol = kPhiClamp * scale;
    for (std::size_t i = 0; i < s.phi.size(); ++i) {
        if (s.phi[i] < -tol) {
            std::ostringstream msg;
            msg << "init_state: cost function is negative (" << s.phi[i] / s.mesh_n << ") at " << detail::cell_name(s, i)
                << "; no Brownian transport exists";
            throw PreconditionError(msg.str());
        }
        if (s.phi[i] < 0.0) s.phi[i] = 0.0;
    }
    // The extreme cells must carry zero cost: they absorb everything that
    // reaches them, so no mass can leave the window.
    for (std::size_t i : {std::size_t{0}, s.phi.size() - 1}) {
        if (std::abs(s.phi[i]) > 1e-9 * scale) {
            std::ostringstream msg;
            msg << "init_state: cost is " << s.phi[i] / s.mesh_n << " at the window edge " << detail::cell_name(s, i)
                << " (means or masses do not match closely enough)";
            throw PreconditionError(msg.str());
        }
        s.phi[i] = 0.0;
    }
    return s;
}

/// One freeze/diffuse step, applied simultaneously to every cell from the
/// snapshot at time t. Mass that does not diffuse stops where it is.
inline SolverState step(const SolverState& s, StepDiagnostics* diag = nullptr) {
    const std::size_t W = s.size();
    SolverState next = s;
    std::vector<double> diffused(W, 0.0);

    for (std::size_t i = 0; i < W; ++i) {
        const double nu = s.live[i];
        const double ph = s.phi[i];
        if (ph == 0.0 && !next.zero_step[i]) next.zero_step[i] = s.t;
        if (ph > 0.5 * nu) {
            diffused[i] = nu;
        } else if (ph > 0.0) {
            // 0 < phi <= nu/2: only the fraction 2 phi / nu keeps moving.
            diffused[i] = 2.0 * ph;
            if (!next.frozen_at[i]) {
                next.frozen_at[i] = s.t;
                next.survival_q[i] = 2.0 * ph / nu;
            }
        } else if (nu > 0.0 && !next.frozen_at[i]) {
            next.frozen_at[i] = s.t;
            next.survival_q[i] = 0.0;
        }
    }
    if (diffused.front() != 0.0 || diffused.back() != 0.0)
        throw ConsistencyError("step: mass would leave the window through an edge cell");

    double stopped_now = 0.0;
    for (std::size_t i = 0; i < W; ++i) {
        const double stop = s.live[i] - diffused[i];
        next.stopped[i] += stop;
        stopped_now += stop;
        next.live[i] = 0.5 * ((i > 0 ? diffused[i - 1] : 0.0) + (i + 1 < W ? diffused[i + 1] : 0.0));
    }
    if (stopped_now > 0.0) {
        next.expected_steps += static_cast<double>(s.t) * stopped_now;
        next.last_stop_step = s.t;
    }

    double min_phi = 0.0;
    double max_phi = 0.0;
    bool monotone = true;
    for (std::size_t i = 0; i < W; ++i) {
        double v = s.phi[i] - 0.5 * diffused[i];
        min_phi = std::min(min_phi, v);
        if (v < 0.0) {
            if (v < -kPhiAbort) {
                std::ostringstream msg;
                msg << "step " << s.t << ": cost became negative (" << v << ") at " << detail::cell_name(s, i);
                throw ConsistencyError(msg.str());
            }
            v = 0.0;
        }
        monotone = monotone && v <= s.phi[i];
        next.phi[i] = v;
        max_phi = std::max(max_phi, v);
    }
    next.t = s.t + 1;

    if (diag) {
        diag->min_phi_before_clamp = min_phi;
        diag->max_phi = max_phi;
        diag->mass_error = std::abs(next.live_total() + next.stopped_total() - s.initial_total);
        diag->phi_monotone = monotone;
    }
    return next;
}

struct CoincidenceCheck {
    long pairs_checked = 0;  ///< zero-cost cells scanned (each stands for all pairs ending there)
    long violations = 0;
    double worst_excess = 0.0;
};

/// For every pair x < y of zero-cost cells checks
///   mu([x,y]) >= nu([x,y]) and nu([x+1,y-1]) >= mu([x+1,y-1]),
/// with mu the target and nu = live + stopped. With D the prefix sum of
/// mu - nu this reads D(y) >= D(x-1) and D(y-1) <= D(x), so one left-to-right
/// sweep with a running max and min covers all pairs.
inline CoincidenceCheck check_coincidence(const SolverState& s, double tol = -1.0) {
    CoincidenceCheck r;
    const std::size_t W = s.size();
    // Prefix sums of W cells carry round-off growing with W.
    if (tol < 0.0) tol = 1e-12 + 1e-14 * static_cast<double>(W);
    std::vector<double> D(W + 1, 0.0);  // D[i + 1] = sum_{j <= i} (mu - nu)(j)
    for (std::size_t i = 0; i < W; ++i) D[i + 1] = D[i] + s.target[i] - s.live[i] - s.stopped[i];
    double max_before = -std::numeric_limits<double>::infinity();  // max D(x-1)
    double min_at = std::numeric_limits<double>::infinity();       // min D(x)
    for (std::size_t i = 0; i < W; ++i) {
        if (s.phi[i] != 0.0) continue;
        if (std::isfinite(max_before)) {
            ++r.pairs_checked;
            const double e1 = max_before - D[i + 1];
            const double e2 = D[i] - min_at;
            const double e = std::max(e1, e2);
            if (e > tol) ++r.violations;
            r.worst_excess = std::max(r.worst_excess, e);
        }
        max_before = std::max(max_before, D[i]);
        min_at = std::min(min_at, D[i + 1]);
    }
    return r;
}

struct SolveOptions {
    long max_steps = 0;  ///< 0 selects 50 n^2 (window width)^2
    bool check_coincidence = true;
    bool record_history = false;
    std::ostream* step_log = nullptr;  ///< CSV rows t,cell,nu,phi,frozen_flag
    double cutoff = 1e-14;  ///< live mass below this, with cost below cutoff * window width, is frozen in place
};

struct SolverDiagnostics {
    long steps = 0;  ///< step at which the last mass stopped
    double max_mass_error = 0.0;
    double min_phi_before_clamp = 0.0;
    bool phi_monotone = true;
    long coincidence_pairs = 0;
    long coincidence_violations = 0;
    double coincidence_worst = 0.0;
    double stefan_phi_residual = 0.0;      ///< max Phi_{g+1}(x)
    double stefan_post_freeze_flow = 0.0;  ///< max mass diffusing from x after g(x)
    double cutoff_live_mass = 0.0;         ///< live mass frozen by the cutoff
    double max_target_error = 0.0;         ///< max |stopped - mu1|
};

struct StepRecord {
    long t = 0;
    std::vector<double> live;
    std::vector<double> phi;
    std::vector<double> stopped;
};

struct TransportSolution {
    int mesh_n = 1;
    long offset = 0;
    std::vector<long> g_steps;
    std::vector<double> q;
    std::vector<long> zero_step;
    LatticeMeasure stopped_measure;
    LatticeMeasure target;
    double expected_time = 0.0;  ///< physical units
    double max_time = 0.0;       ///< physical units
    SolverDiagnostics diagnostics;
    std::vector<StepRecord> history;

    [[nodiscard]] std::size_t size() const { return g_steps.size(); }
    [[nodiscard]] long index(std::size_t i) const { return offset + static_cast<long>(i); }
    [[nodiscard]] double position(std::size_t i) const { return static_cast<double>(index(i)) / mesh_n; }
    [[nodiscard]] double g_physical(std::size_t i) const {
        return static_cast<double>(g_steps[i]) / (static_cast<double>(mesh_n) * mesh_n);
    }
    /// g in steps at lattice index k, or -1 outside the window.
    [[nodiscard]] long g_at(long k) const {
        const long i = k - offset;
        return (i >= 0 && i < static_cast<long>(size())) ? g_steps[static_cast<std::size_t>(i)] : -1;
    }
    [[nodiscard]] double q_at(long k) const {
        const long i = k - offset;
        return (i >= 0 && i < static_cast<long>(size())) ? q[static_cast<std::size_t>(i)] : 0.0;
    }
};

namespace detail {

inline void log_step(std::ostream& os, const SolverState& s) {
    for (std::size_t i = 0; i < s.size(); ++i)
        os << s.t << ',' << s.index(i) << ',' << s.live[i] << ',' << s.phi[i] << ','
           << (s.frozen_at[i] && *s.frozen_at[i] < s.t ? 1 : 0) << '\n';
}

}  // namespace detail

inline long default_max_steps(const LatticeMeasure& mu0n, const LatticeMeasure& mu1n) {
    const long lo = std::min(mu0n.support().first, mu1n.support().first);
    const long hi = std::max(mu0n.support().second, mu1n.support().second);
    const double width = static_cast<double>(hi - lo + 1) / mu0n.mesh();
    const double n = mu0n.mesh();
    return std::max(100L, static_cast<long>(std::ceil(50.0 * n * n * width * width)));
}

/// Runs the freeze/diffuse scheme until every cell has zero cost and no
/// live mass remains. The stopped measure reproduces mu1.
inline TransportSolution solve(const LatticeMeasure& mu0n, const LatticeMeasure& mu1n, SolveOptions opt = {}) {
    SolverState s = init_state(mu0n, mu1n);
    const long max_steps = opt.max_steps > 0 ? opt.max_steps : default_max_steps(mu0n, mu1n);
    TransportSolution sol;
    SolverDiagnostics& d = sol.diagnostics;
    const std::size_t W = s.size();
    std::vector<double> post_flow(W, 0.0);

    if (opt.step_log) {
        opt.step_log->precision(17);
        *opt.step_log << "t,cell,nu,phi,frozen_flag\n";
    }

    auto observe = [&](const SolverState& st) {
        if (opt.record_history) sol.history.push_back({st.t, st.live, st.phi, st.stopped});
        if (opt.step_log) detail::log_step(*opt.step_log, st);
        if (opt.check_coincidence) {
            const auto c = check_coincidence(st);
            d.coincidence_pairs += c.pairs_checked;
            d.coincidence_violations += c.violations;
            d.coincidence_worst = std::max(d.coincidence_worst, c.worst_excess);
        }
    };

    auto finished = [](const SolverState& st) {
        for (std::size_t i = 0; i < st.size(); ++i)
            if (st.live[i] != 0.0 || st.phi[i] != 0.0) return false;
        return true;
    };

    observe(s);
    while (!finished(s)) {
        if (s.t >= max_steps) {
            std::ostringstream msg;
            msg << "solve: no termination after " << max_steps << " steps; live mass " << s.live_total()
                << ", max cost " << *std::max_element(s.phi.begin(), s.phi.end()) / s.mesh_n;
            throw NonTerminationError(msg.str());
        }
        const double live = s.live_total();
        const double maxphi = *std::max_element(s.phi.begin(), s.phi.end());
        // Cost carries rounding from running sums over the window, hence the width factor.
        if (live <= opt.cutoff && maxphi <= opt.cutoff * static_cast<double>(W)) {
            // Round-off tail: stop what is left where it is.
            d.cutoff_live_mass = live;
            for (std::size_t i = 0; i < W; ++i) {
                if (s.phi[i] != 0.0 && !s.zero_step[i]) s.zero_step[i] = s.t;
                s.phi[i] = 0.0;
            }
        }
        // Post-freeze flow: anything still diffusing from a frozen cell.
        StepDiagnostics sd;
        SolverState next = step(s, &sd);
        for (std::size_t i = 0; i < W; ++i) {
            if (s.frozen_at[i] && *s.frozen_at[i] < s.t) {
                const double moved = s.live[i] - (next.stopped[i] - s.stopped[i]);
                post_flow[i] = std::max(post_flow[i], moved);
            }
            if (next.frozen_at[i] && *next.frozen_at[i] == s.t)
                d.stefan_phi_residual = std::max(d.stefan_phi_residual, next.phi[i]);
        }
        d.max_mass_error = std::max(d.max_mass_error, sd.mass_error);
        d.min_phi_before_clamp = std::min(d.min_phi_before_clamp, sd.min_phi_before_clamp);
        d.phi_monotone = d.phi_monotone && sd.phi_monotone;
        s = std::move(next);
        observe(s);
    }
    for (std::size_t i = 0; i < W; ++i) {
        if (!s.zero_step[i]) s.zero_step[i] = s.t;
        d.stefan_post_freeze_flow = std::max(d.stefan_post_freeze_flow, post_flow[i]);
    }

    const double n2 = static_cast<double>(s.mesh_n) * s.mesh_n;
    sol.mesh_n = s.mesh_n;
    sol.offset = s.offset;
    sol.g_steps.resize(W);
    sol.q.resize(W);
    sol.zero_step.resize(W);
    for (std::size_t i = 0; i < W; ++i) {
        sol.zero_step[i] = *s.zero_step[i];
        // Cells no mass ever reached take the step at which their cost vanished.
        sol.g_steps[i] = s.frozen_at[i] ? *s.frozen_at[i] : *s.zero_step[i];
        sol.q[i] = s.survival_q[i] ? *s.survival_q[i] : 0.0;
    }
    sol.stopped_measure = LatticeMeasure(s.mesh_n, s.offset, s.stopped);
    sol.target = LatticeMeasure(s.mesh_n, s.offset, s.target);
    sol.expected_time = s.expected_steps / n2;
    sol.max_time = static_cast<double>(s.last_stop_step) / n2;
    d.steps = s.last_stop_step;
    for (std::size_t i = 0; i < W; ++i)
        d.max_target_error = std::max(d.max_target_error, std::abs(s.stopped[i] - s.target[i]));
    return sol;
}

/// f(k/n) = g(k) / n^2, linear between nodes.
inline PiecewiseLinear extend_f(const TransportSolution& sol) {
    if (sol.size() == 0) throw ConsistencyError("extend_f: empty solution");
    std::vector<double> xs(sol.size()), ys(sol.size());
    for (std::size_t i = 0; i < sol.size(); ++i) {
        if (sol.g_steps[i] < 0) throw ConsistencyError("extend_f: g undefined at a cell");
        xs[i] = sol.position(i);
        ys[i] = sol.g_physical(i);
    }
    return {std::move(xs), std::move(ys)};
}

/// CSV with columns position, g_physical, q.
inline void write_solution_csv(std::ostream& os, const TransportSolution& sol) {
    const auto prec = os.precision(17);
    os << "position,g_physical,q\n";
    for (std::size_t i = 0; i < sol.size(); ++i) os << sol.position(i) << ',' << sol.g_physical(i) << ',' << sol.q[i] << '\n';
    os.precision(prec);
}

struct ExpectedTimeReport {
    double expected_time = 0.0;
    double variance_gap = 0.0;
    double error = 0.0;
    [[nodiscard]] bool pass(double tol = 1e-8) const { return error <= tol; }
};

/// E T against Var mu1 - Var mu0 (physical units).
inline ExpectedTimeReport expected_time_check(const TransportSolution& sol, const LatticeMeasure& mu0n,
                                              const LatticeMeasure& mu1n) {
    ExpectedTimeReport r;
    r.expected_time = sol.expected_time;
    r.variance_gap = mu1n.variance() - mu0n.variance();
    r.error = std::abs(r.expected_time - r.variance_gap);
    return r;
}

struct CollapseReport {
    double alpha = 0.0;       ///< max over intervals J of -|J| ln mu1(J)
    double max_ratio = 0.0;   ///< max over live components I of (disappearance time) / (alpha |I|)
    long components = 0;
};

/// Post-hoc component-collapse diagnostic. At step t the live set is the cells
/// whose cost is still positive; each maximal interval of it vanishes by the
/// largest zero_step it contains.
inline CollapseReport collapse_diagnostics(const TransportSolution& sol) {
    CollapseReport r;
    const std::size_t W = sol.size();
    const double n = sol.mesh_n;
    const auto& mu = sol.target.masses();
    for (std::size_t a = 0; a < W; ++a) {
        double mass = 0.0;
        for (std::size_t b = a; b < W; ++b) {
            mass += mu[b];
            if (mass > 0.0 && mass < 1.0) r.alpha = std::max(r.alpha, -(static_cast<double>(b - a + 1) / n) * std::log(mass));
        }
    }
    if (!(r.alpha > 0.0)) return r;

    std::vector<long> events(sol.zero_step.begin(), sol.zero_step.end());
    events.push_back(0);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    for (long t : events) {
        std::size_t i = 0;
        while (i < W) {
            if (sol.zero_step[i] <= t) {
                ++i;
                continue;
            }
            std::size_t j = i;
            long last = 0;
            while (j < W && sol.zero_step[j] > t) last = std::max(last, sol.zero_step[j++]);
            ++r.components;
            const double len = static_cast<double>(j - i) / n;
            const double dt = static_cast<double>(last - t) / (n * n);
            r.max_ratio = std::max(r.max_ratio, dt / (r.alpha * len));
            i = j;
        }
    }
    return r;
}

}  // namespace btransport
