#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cantor.hpp"
#include "error.hpp"
#include "lattice.hpp"
#include "measures.hpp"
#include "normal.hpp"
#include "piecewise_linear.hpp"
#include "solver.hpp"
#include "svg.hpp"

namespace btransport {

/// Radius where the N(0, t0) and N(0, 1) densities cross.
inline double crossing_radius(double t0) {
    if (!(t0 > 0.0 && t0 < 1.0)) throw PreconditionError("crossing_radius: t0 must lie in (0, 1)");
    return std::sqrt(t0 * std::log(1.0 / t0) / (1.0 - t0));
}

struct CantelliConfig {
    double t0 = 0.5;
    std::optional<double> cantor_radius;  ///< defaults to 0.8 * crossing_radius(t0)
    int cantor_depth = 8;
    double truncation_R = 4.0;
    int mesh_n = 400;
    double horizon_margin = 0.05;

    [[nodiscard]] double radius() const { return cantor_radius ? *cantor_radius : 0.8 * crossing_radius(t0); }

    void validate() const {
        if (!(t0 > 0.0 && t0 < 1.0)) {
            std::ostringstream msg;
            msg << "t0 = " << t0 << " must lie in (0, 1)";
            throw PreconditionError(msg.str());
        }
        const double xs = crossing_radius(t0);
        const double r = radius();
        if (!(r > 0.0) || !(r < xs)) {
            std::ostringstream msg;
            msg << "Cantor radius r = " << r << " must lie in (0, " << xs << "), below the density crossing radius";
            throw PreconditionError(msg.str());
        }
        if (cantor_depth < 0 || cantor_depth > 24) throw PreconditionError("Cantor depth must lie in [0, 24]");
        if (!(truncation_R > 1.0)) throw PreconditionError("truncation R must exceed 1");
        if (!(truncation_R > r)) throw PreconditionError("truncation R must exceed the Cantor radius");
        if (mesh_n < 16) throw PreconditionError("mesh n must be at least 16");
        if (!(horizon_margin >= 0.0)) throw PreconditionError("horizon margin must be nonnegative");
    }
};

/// Gaussian N(0, 1) mass of the Cantor set below x, with O(log) lookups.
class CantorGaussianMass {
public:
    explicit CantorGaussianMass(const CantorSet& K) : lo_(K.left_ends()), hi_(K.right_ends()) {
        prefix_.assign(lo_.size() + 1, 0.0);
        for (std::size_t i = 0; i < lo_.size(); ++i)
            prefix_[i + 1] = prefix_[i] + (normal::cdf(hi_[i]) - normal::cdf(lo_[i]));
    }

    [[nodiscard]] double below(double x) const {
        const auto it = std::upper_bound(lo_.begin(), lo_.end(), x);
        const auto k = static_cast<std::size_t>(it - lo_.begin());
        if (k == 0) return 0.0;
        const std::size_t i = k - 1;
        return prefix_[i] + std::max(0.0, normal::cdf(std::min(x, hi_[i])) - normal::cdf(lo_[i]));
    }

    [[nodiscard]] double total() const { return prefix_.back(); }

private:
    std::vector<double> lo_, hi_;
    std::vector<double> prefix_;
};

struct CantelliProblem {
    CantorSet cantor;
    DensityMeasure mu0;
    DensityMeasure mu1;
    double c = 1.0;  ///< P(N(0,1) not in K)
};

/// mu0 with density c^-1 rho_{t0} off K and c^-1 (rho_{t0} - rho_1) on K;
/// mu1 the law of N(0, 1) conditioned to avoid K.
inline CantelliProblem build_problem(const CantelliConfig& cfg) {
    cfg.validate();
    const double r = cfg.radius();
    CantorSet K = build_cantor({-r, r}, cfg.cantor_depth);
    const CantorGaussianMass gk(K);
    const double c = 1.0 - gk.total();
    const double t0 = cfg.t0;

    auto Kp = std::make_shared<CantorSet>(K);
    auto gkp = std::make_shared<CantorGaussianMass>(gk);
    const double window = std::max(cfg.truncation_R + 1.0, 40.0);
    std::vector<double> breaks = K.endpoints();

    DensityParts p0;
    p0.density = [Kp, c, t0](double x) {
        const double base = normal::pdf(x, t0);
        return (Kp->contains(x) ? base - normal::pdf(x) : base) / c;
    };
    p0.cdf = [gkp, c, t0](double x) { return (normal::cdf(x, t0) - gkp->below(x)) / c; };
    p0.window = {-window * std::sqrt(t0), window * std::sqrt(t0)};
    p0.breakpoints = breaks;

    DensityParts p1;
    p1.density = [Kp, c](double x) { return Kp->contains(x) ? 0.0 : normal::pdf(x) / c; };
    p1.cdf = [gkp, c](double x) { return (normal::cdf(x) - gkp->below(x)) / c; };
    p1.window = {-window, window};
    p1.breakpoints = breaks;

    return {std::move(K), DensityMeasure(std::move(p0)), DensityMeasure(std::move(p1)), c};
}

/// Rescales the negative and positive cells of a lattice measure so that it
/// has total mass exactly one and mean exactly zero (the discrete analog of
/// gamma-centering). Returns the two weights through c and d.
inline LatticeMeasure center_lattice(const LatticeMeasure& m, double* c_out = nullptr, double* d_out = nullptr) {
    double A = 0.0, B = 0.0, Z = 0.0, a = 0.0, b = 0.0;
    for (long k = m.first_index(); k <= m.last_index(); ++k) {
        const double v = m.at(k);
        if (k < 0) {
            A += v;
            a += static_cast<double>(-k) * v;
        } else if (k > 0) {
            B += v;
            b += static_cast<double>(k) * v;
        } else {
            Z += v;
        }
    }
    if (!(a > 0.0) || !(b > 0.0)) throw PreconditionError("center_lattice: measure must charge both sides of 0");
    const double c = (1.0 - Z) / (A + a * B / b);
    const double d = c * a / b;
    std::vector<double> out(m.masses());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const long k = m.first_index() + static_cast<long>(i);
        if (k < 0) out[i] *= c;
        else if (k > 0) out[i] *= d;
    }
    if (c_out) *c_out = c;
    if (d_out) *d_out = d;
    return {m.mesh(), m.offset(), std::move(out)};
}

struct PipelineDiagnostics {
    double gamma_c0 = 1.0, gamma_d0 = 1.0, gamma_c1 = 1.0, gamma_d1 = 1.0;
    double lattice_c0 = 1.0, lattice_d0 = 1.0, lattice_c1 = 1.0, lattice_d1 = 1.0;
    double min_target_mass = 0.0;  ///< smallest mu1^(n) cell
    double min_cost = 0.0;         ///< smallest initial lattice cost (physical units)
    ExpectedTimeReport expected_time;
};

struct CantelliResult {
    CantelliConfig config;
    CantorSet cantor;
    double c = 1.0;
    double C = 0.0;
    TransportSolution solution;
    LatticeMeasure mu0n;
    LatticeMeasure mu1n;
    PiecewiseLinear f1_grid;  ///< f1 on the lattice nodes of [-R, R]
    PipelineDiagnostics diagnostics;

    /// f1 on the line: the solved grid inside [-R, R], 1 - t0 outside.
    [[nodiscard]] double f1(double x) const {
        if (x < f1_grid.lo() || x > f1_grid.hi()) return 1.0 - config.t0;
        return f1_grid(x);
    }
    [[nodiscard]] double f(double x) const { return cantor.contains(x) ? config.t0 : config.t0 + f1(x); }
    [[nodiscard]] double phi(double x) const { return std::sqrt(std::max(0.0, C - f(x))); }

    /// Points where f may fail to be smooth: grid nodes, Cantor endpoints and
    /// the truncation edges. Sorted.
    [[nodiscard]] std::vector<double> breakpoints() const {
        std::vector<double> b = f1_grid.nodes();
        const auto e = cantor.endpoints();
        b.insert(b.end(), e.begin(), e.end());
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    /// Sample grid used for output: lattice nodes plus Cantor endpoints.
    [[nodiscard]] std::vector<double> output_grid() const { return breakpoints(); }
};

/// Builds the problem, truncates and centers both measures, discretizes them,
/// runs the lattice transport and assembles f and phi.
inline CantelliResult run_pipeline(const CantelliConfig& cfg, SolveOptions opt = {}) {
    CantelliProblem prob = build_problem(cfg);
    const double R = cfg.truncation_R;
    PipelineDiagnostics diag;

    auto g0 = gamma_center(truncate_normalize(prob.mu0, R));
    auto g1 = gamma_center(truncate_normalize(prob.mu1, R));
    diag.gamma_c0 = g0.c;
    diag.gamma_d0 = g0.d;
    diag.gamma_c1 = g1.c;
    diag.gamma_d1 = g1.d;

    LatticeMeasure l0 = center_lattice(discretize(g0.measure, cfg.mesh_n), &diag.lattice_c0, &diag.lattice_d0);
    LatticeMeasure l1 = center_lattice(discretize(g1.measure, cfg.mesh_n), &diag.lattice_c1, &diag.lattice_d1);

    diag.min_target_mass = *std::min_element(l1.masses().begin(), l1.masses().end());
    {
        const auto prof = lattice_cost_profile(l0, l1, l1.first_index(), l1.last_index());
        diag.min_cost = *std::min_element(prof.begin(), prof.end()) / cfg.mesh_n;
    }

    TransportSolution sol;
    try {
        sol = solve(l0, l1, opt);
    } catch (const PreconditionError& e) {
        throw PreconditionError(std::string(e.what()) + " (try a larger truncation R or mesh n)");
    }
    diag.expected_time = expected_time_check(sol, l0, l1);

    CantelliResult res{cfg, std::move(prob.cantor), prob.c, 0.0, std::move(sol), std::move(l0), std::move(l1), {}, diag};
    res.f1_grid = extend_f(res.solution);
    res.C = cfg.t0 + res.f1_grid.max_value() + cfg.horizon_margin;
    return res;
}

struct AsymptoticsReport {
    double level = 0.0;             ///< 1 - t0
    double tolerance = 0.0;         ///< 5 / n
    double min_excess = 0.0;        ///< min of f1 - (1 - t0) over 2 <= |x| <= R - 1
    double max_excess = 0.0;
    double max_excess_inner = 0.0;  ///< over 2 <= |x| <= 2.5
    double max_excess_outer = 0.0;  ///< over 2.5 <= |x| <= 3
    double min_excess_2_3 = 0.0;    ///< over 2 <= |x| <= 3
    double beta_fit = 0.0;          ///< decay exponent of the positive part, fit of ln(excess) on x^2
    std::vector<double> bin_means;  ///< mean excess on |x| bins of width 0.25 starting at 2
    bool lower_bound_ok = false;
    bool decreasing_ok = false;
    [[nodiscard]] bool pass() const { return lower_bound_ok && decreasing_ok; }
};

/// Compares f1 on the solved grid with 1 - t0 away from the origin.
inline AsymptoticsReport f1_asymptotics_report(const CantelliResult& res) {
    AsymptoticsReport r;
    const double t0 = res.config.t0;
    const double R = res.config.truncation_R;
    r.level = 1.0 - t0;
    r.tolerance = 5.0 / res.config.mesh_n;
    const auto& xs = res.f1_grid.nodes();
    const auto& ys = res.f1_grid.values();
    const double inf = std::numeric_limits<double>::infinity();
    r.min_excess = inf;
    r.max_excess = -inf;
    r.max_excess_inner = -inf;
    r.max_excess_outer = -inf;
    r.min_excess_2_3 = inf;
    const double upper = R - 1.0;
    const int nbins = std::max(1, static_cast<int>(std::floor((upper - 2.0) / 0.25 + 1e-9)));
    std::vector<double> bin_sum(static_cast<std::size_t>(nbins), 0.0);
    std::vector<int> bin_cnt(static_cast<std::size_t>(nbins), 0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    constexpr double eps = 1e-12;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double ax = std::abs(xs[i]);
        const double e = ys[i] - r.level;
        if (ax >= 2.0 - eps && ax <= 3.0 + eps) r.min_excess_2_3 = std::min(r.min_excess_2_3, e);
        if (ax >= 2.0 - eps && ax <= 2.5 + eps) r.max_excess_inner = std::max(r.max_excess_inner, e);
        if (ax >= 2.5 - eps && ax <= 3.0 + eps) r.max_excess_outer = std::max(r.max_excess_outer, e);
        if (ax < 2.0 - eps || ax > upper + eps) continue;
        r.min_excess = std::min(r.min_excess, e);
        r.max_excess = std::max(r.max_excess, e);
        const int b = std::min(nbins - 1, static_cast<int>((ax - 2.0) / 0.25));
        bin_sum[static_cast<std::size_t>(b)] += e;
        ++bin_cnt[static_cast<std::size_t>(b)];
        if (e > 0.0) {
            const double u = ax * ax, v = std::log(e);
            sx += u;
            sy += v;
            sxx += u * u;
            sxy += u * v;
            ++m;
        }
    }
    for (int b = 0; b < nbins; ++b)
        r.bin_means.push_back(bin_cnt[static_cast<std::size_t>(b)] ? bin_sum[static_cast<std::size_t>(b)] / bin_cnt[static_cast<std::size_t>(b)] : 0.0);
    if (m >= 2) {
        const double den = m * sxx - sx * sx;
        if (den > 0.0) r.beta_fit = -(m * sxy - sx * sy) / den;
    }
    r.lower_bound_ok = r.min_excess_2_3 >= -r.tolerance;
    r.decreasing_ok = r.max_excess_outer <= r.max_excess_inner;
    return r;
}

/// Writes f.csv, phi.csv, cantor.csv, solution.csv, meta and phi.svg into dir.
inline void write_bundle(const CantelliResult& res, const std::filesystem::path& dir, bool with_svg = true) {
    std::filesystem::create_directories(dir);
    const auto grid = res.output_grid();
    auto open = [&](const char* name) {
        std::ofstream os(dir / name);
        if (!os) throw PreconditionError(std::string("cannot write ") + (dir / name).string());
        os.precision(17);
        return os;
    };
    {
        auto os = open("f.csv");
        os << "x,f\n";
        for (double x : grid) os << x << ',' << res.f(x) << '\n';
    }
    {
        auto os = open("phi.csv");
        os << "x,phi\n";
        for (double x : grid) os << x << ',' << res.phi(x) << '\n';
    }
    {
        auto os = open("cantor.csv");
        write_cantor_csv(os, res.cantor);
    }
    {
        auto os = open("solution.csv");
        write_solution_csv(os, res.solution);
    }
    {
        auto os = open("meta");
        os << "t0=" << res.config.t0 << '\n'
           << "c=" << res.c << '\n'
           << "C=" << res.C << '\n'
           << "E_T=" << res.solution.expected_time << '\n'
           << "n=" << res.config.mesh_n << '\n'
           << "R=" << res.config.truncation_R << '\n'
           << "r=" << res.config.radius() << '\n'
           << "depth=" << res.config.cantor_depth << '\n'
           << "steps=" << res.solution.diagnostics.steps << '\n';
    }
    if (with_svg) {
        std::vector<double> ys;
        ys.reserve(grid.size());
        for (double x : grid) ys.push_back(res.phi(x));
        auto os = open("phi.svg");
        write_svg_line_plot(os, grid, ys, "phi(x)");
    }
}

}  // namespace btransport
