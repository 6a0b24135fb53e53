#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "error.hpp"
#include "lattice.hpp"
#include "measures.hpp"
#include "normal.hpp"
#include "philox.hpp"
#include "pipeline.hpp"
#include "piecewise_linear.hpp"
#include "solver.hpp"

namespace btransport {

/// Sorted sample of a real random variable.
class EmpiricalMeasure {
public:
    EmpiricalMeasure() = default;
    EmpiricalMeasure(std::vector<double> samples, std::uint64_t seed) : samples_(std::move(samples)), seed_(seed) {
        std::sort(samples_.begin(), samples_.end());
    }

    [[nodiscard]] const std::vector<double>& samples() const { return samples_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::size_t count() const { return samples_.size(); }

    /// Fraction of samples <= x.
    [[nodiscard]] double cdf(double x) const {
        if (samples_.empty()) return 0.0;
        const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
        return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
    }

    [[nodiscard]] double mean() const {
        double s = 0.0;
        for (double v : samples_) s += v;
        return samples_.empty() ? 0.0 : s / static_cast<double>(samples_.size());
    }

    [[nodiscard]] double variance() const {
        const double m = mean();
        double s = 0.0;
        for (double v : samples_) s += (v - m) * (v - m);
        return samples_.size() < 2 ? 0.0 : s / static_cast<double>(samples_.size() - 1);
    }

private:
    std::vector<double> samples_;
    std::uint64_t seed_ = 0;
};

/// One-sample Kolmogorov-Smirnov statistic sup |F_emp - F| for a continuous F.
template <class Cdf>
double ks_distance(const EmpiricalMeasure& e, Cdf&& cdf) {
    const auto& s = e.samples();
    if (s.empty()) throw PreconditionError("ks_distance: empty sample");
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double F = cdf(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return d;
}

/// KS distance between an empirical sample of lattice positions and a lattice
/// measure. Both distribution functions jump only at atoms, so comparing right
/// limits at every atom gives the supremum.
inline double ks_distance_lattice(const EmpiricalMeasure& e, const LatticeMeasure& m) {
    if (e.count() == 0) throw PreconditionError("ks_distance_lattice: empty sample");
    const auto& s = e.samples();
    const double n = static_cast<double>(s.size());
    const double total = m.total();
    const double h = 0.5 / m.mesh();
    double F = 0.0;
    double d = 0.0;
    std::size_t j = 0;
    for (long k = m.first_index(); k <= m.last_index(); ++k) {
        F += m.at(k) / total;
        const double x = m.position(k);
        while (j < s.size() && s[j] < x + h) ++j;
        d = std::max(d, std::abs(static_cast<double>(j) / n - F));
    }
    if (j < s.size()) d = std::max(d, 1.0 - static_cast<double>(j) / n);
    return d;
}

/// Levy distance: smallest delta with F(x - delta) - delta <= G(x) <= F(x + delta) + delta
/// on every grid point, found by bisection.
template <class CdfF, class CdfG>
double levy_distance(CdfF&& F, CdfG&& G, const std::vector<double>& grid, int iterations = 50) {
    auto ok = [&](double delta) {
        for (double x : grid) {
            const double g = G(x);
            if (F(x - delta) - delta > g || g > F(x + delta) + delta) return false;
        }
        return true;
    };
    if (ok(0.0)) return 0.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

inline std::vector<double> uniform_grid(double a, double b, std::size_t points) {
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = points == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

struct PathSimConfig {
    std::size_t num_paths = 100000;
    double time_step = 1e-4;  ///< continuum Euler step
    bool lattice = false;
    double max_time = 10.0;
    std::uint64_t seed = 1;
    unsigned threads = 0;  ///< 0 selects hardware concurrency

    void validate() const {
        if (num_paths < 1) throw PreconditionError("PathSimConfig: num_paths must be >= 1");
        if (!(max_time > 0.0)) throw PreconditionError("PathSimConfig: max_time must be positive");
        if (!lattice && !(time_step > 0.0)) throw PreconditionError("PathSimConfig: time_step must be positive");
    }
};

/// Runs body(i) for every path index, split over worker threads. Each path
/// owns its random stream, so results do not depend on the thread count.
template <class Body>
void for_each_path(std::size_t count, unsigned threads, Body&& body) {
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Draws a starting point for a path.
using StartSampler = std::function<double(Philox4x32&)>;

inline StartSampler point_start(double x) {
    return [x](Philox4x32&) { return x; };
}

/// Inverse-CDF sampling from a tabulated distribution function.
inline StartSampler density_start(const DensityMeasure& m, std::size_t table = 20001) {
    const auto [lo, hi] = m.window();
    std::vector<double> xs = uniform_grid(lo, hi, table);
    for (double b : m.breakpoints())
        if (b > lo && b < hi) xs.push_back(b);
    std::sort(xs.begin(), xs.end());
    std::vector<double> Fs(xs.size());
    const double total = m.total_mass();
    for (std::size_t i = 0; i < xs.size(); ++i) Fs[i] = m.cdf(xs[i]) / total;
    for (std::size_t i = 1; i < Fs.size(); ++i) Fs[i] = std::max(Fs[i], Fs[i - 1]);
    return [xs = std::move(xs), Fs = std::move(Fs)](Philox4x32& rng) {
        const double u = rng.uniform() * Fs.back();
        auto it = std::upper_bound(Fs.begin(), Fs.end(), u);
        if (it == Fs.begin()) return xs.front();
        if (it == Fs.end()) return xs.back();
        const auto i = static_cast<std::size_t>(it - Fs.begin());
        const double w = (u - Fs[i - 1]) / std::max(Fs[i] - Fs[i - 1], 1e-300);
        return xs[i - 1] + w * (xs[i] - xs[i - 1]);
    };
}

/// Samples a lattice index of m (returned as a double index, not a position).
class LatticeSampler {
public:
    explicit LatticeSampler(const LatticeMeasure& m) : offset_(m.first_index()) {
        cum_.resize(m.size());
        double s = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) cum_[i] = (s += m.masses()[i]);
        if (!(s > 0.0)) throw PreconditionError("LatticeSampler: zero mass");
    }
    long operator()(Philox4x32& rng) const {
        const double u = rng.uniform() * cum_.back();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        if (it == cum_.end()) --it;
        return offset_ + static_cast<long>(it - cum_.begin());
    }

private:
    long offset_;
    std::vector<double> cum_;
};

struct PathSample {
    double position = 0.0;
    double time = 0.0;
};

struct SimulationResult {
    EmpiricalMeasure positions;
    std::vector<PathSample> paths;  ///< in path-index order
    std::size_t overtime = 0;       ///< paths still running at max_time
    double max_crossing_gap = 0.0;  ///< max |T - f(X_T)| (continuum mode)
    [[nodiscard]] double overtime_fraction() const {
        return paths.empty() ? 0.0 : static_cast<double>(overtime) / static_cast<double>(paths.size());
    }
    [[nodiscard]] bool ok() const { return overtime_fraction() <= 1e-3; }
};

namespace detail {

inline SimulationResult collect(std::vector<PathSample> paths, std::vector<char> over, std::uint64_t seed) {
    SimulationResult r;
    std::vector<double> xs(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        xs[i] = paths[i].position;
        r.overtime += over[i] ? 1 : 0;
    }
    r.positions = EmpiricalMeasure(std::move(xs), seed);
    r.paths = std::move(paths);
    return r;
}

}  // namespace detail

/// Random walk on (1/n)Z stopped by the rule of (g, q): at step t in cell x the
/// walker stops if t > g(x), stops with probability 1 - q(x) if t = g(x), and
/// otherwise moves to a uniformly chosen neighbour.
inline SimulationResult simulate_first_intersection_lattice(const TransportSolution& sol, const LatticeMeasure& mu0n,
                                                            PathSimConfig cfg) {
    cfg.lattice = true;
    cfg.validate();
    const LatticeSampler start(mu0n);
    const double n2 = static_cast<double>(sol.mesh_n) * sol.mesh_n;
    const long max_steps = static_cast<long>(std::ceil(cfg.max_time * n2));
    std::vector<PathSample> paths(cfg.num_paths);
    std::vector<char> over(cfg.num_paths, 0);
    const long W = static_cast<long>(sol.size());

    for_each_path(cfg.num_paths, cfg.threads, [&](std::size_t p) {
        Philox4x32 rng(cfg.seed, p);
        long i = start(rng) - sol.offset;
        if (i < 0 || i >= W) throw ConsistencyError("lattice simulation: start outside the solution window");
        std::uint32_t bits = 0;
        int left = 0;
        long t = 0;
        for (;; ++t) {
            const long g = sol.g_steps[static_cast<std::size_t>(i)];
            if (t > g) break;
            if (t == g) {
                const double q = sol.q[static_cast<std::size_t>(i)];
                if (q <= 0.0 || (q < 1.0 && rng.uniform() >= q)) break;
            }
            if (t >= max_steps) {
                over[p] = 1;
                break;
            }
            if (left == 0) {
                bits = rng();
                left = 32;
            }
            i += (bits & 1u) ? 1 : -1;
            bits >>= 1;
            --left;
            if (i < 0 || i >= W) throw ConsistencyError("lattice simulation: walker left the solution window");
        }
        paths[p] = {static_cast<double>(sol.offset + i) / sol.mesh_n, static_cast<double>(t) / n2};
    });
    return detail::collect(std::move(paths), std::move(over), cfg.seed);
}

namespace detail {

/// First s in the Euler step from (s0, x0) to (s0 + dt, x1) where the path
/// meets the graph s = f(x), with linear interpolation in time. f is piecewise
/// linear, so s - f(x) is piecewise linear along the step and each piece is
/// checked in order.
inline std::optional<std::pair<double, double>> crossing(const PiecewiseLinear& f, double s0, double x0, double dt,
                                                         double x1) {
    auto h = [&](double lam) { return s0 + lam * dt - f(x0 + lam * (x1 - x0)); };
    std::vector<double> lams{0.0};
    if (x1 != x0) {
        const auto& nodes = f.nodes();
        const double a = std::min(x0, x1), b = std::max(x0, x1);
        auto it = std::upper_bound(nodes.begin(), nodes.end(), a);
        for (; it != nodes.end() && *it < b; ++it) lams.push_back((*it - x0) / (x1 - x0));
        std::sort(lams.begin(), lams.end());
    }
    lams.push_back(1.0);
    double prev_l = lams[0];
    double prev_h = h(prev_l);
    if (prev_h >= 0.0) return std::make_pair(s0, x0);
    for (std::size_t k = 1; k < lams.size(); ++k) {
        const double l = lams[k];
        const double v = h(l);
        if (v >= 0.0) {
            const double root = prev_l + (l - prev_l) * (-prev_h) / (v - prev_h);
            return std::make_pair(s0 + root * dt, x0 + root * (x1 - x0));
        }
        prev_l = l;
        prev_h = v;
    }
    return std::nullopt;
}

struct ContinuumPath {
    double x = 0.0;
    double s = 0.0;
    bool over = false;
};

/// Euler path from x0 at local clock 0 until s = f(X_s).
inline ContinuumPath run_continuum(const PiecewiseLinear& f, double x0, double dt, double max_time, Philox4x32& rng,
                                   std::normal_distribution<double>& normal_dist) {
    double s = 0.0, x = x0;
    if (f(x) <= 0.0) return {x, 0.0, false};
    const double sd = std::sqrt(dt);
    while (s < max_time) {
        const double x1 = x + sd * normal_dist(rng);
        if (const auto c = crossing(f, s, x, dt, x1)) return {c->second, c->first, false};
        s += dt;
        x = x1;
    }
    return {x, s, true};
}

}  // namespace detail

/// Euler paths started from `start` and stopped at the first time t with
/// t = f(X_t).
inline SimulationResult simulate_first_intersection(const StartSampler& start, const PiecewiseLinear& f,
                                                    PathSimConfig cfg) {
    cfg.lattice = false;
    cfg.validate();
    std::vector<PathSample> paths(cfg.num_paths);
    std::vector<char> over(cfg.num_paths, 0);
    std::vector<double> gaps(cfg.num_paths, 0.0);
    for_each_path(cfg.num_paths, cfg.threads, [&](std::size_t p) {
        Philox4x32 rng(cfg.seed, p);
        std::normal_distribution<double> nd(0.0, 1.0);
        const double x0 = start(rng);
        const auto r = detail::run_continuum(f, x0, cfg.time_step, cfg.max_time, rng, nd);
        paths[p] = {r.x, r.s};
        over[p] = r.over ? 1 : 0;
        if (!r.over) gaps[p] = std::abs(r.s - f(r.x));
    });
    auto res = detail::collect(std::move(paths), std::move(over), cfg.seed);
    res.max_crossing_gap = *std::max_element(gaps.begin(), gaps.end());
    return res;
}

/// The full stopping rule of the counter-example: B_{t0} ~ N(0, t0); on K the
/// path stops at t0 with probability rho_1 / rho_{t0}; otherwise it continues
/// from time t0 until t = t0 + f1(X_t). The stopped position should be N(0, 1).
inline SimulationResult simulate_construction(const CantelliResult& res, PathSimConfig cfg) {
    cfg.lattice = false;
    cfg.validate();
    const double t0 = res.config.t0;
    const PiecewiseLinear& f1 = res.f1_grid;
    const double level = 1.0 - t0;
    // Outside the solved window f1 is the constant 1 - t0.
    std::vector<double> xs = f1.nodes(), ys = f1.values();
    const double far = 1e6;
    xs.insert(xs.begin(), {-far, std::nextafter(xs.front(), -far)});
    ys.insert(ys.begin(), {level, level});
    xs.push_back(std::nextafter(xs.back(), far));
    ys.push_back(level);
    xs.push_back(far);
    ys.push_back(level);
    const PiecewiseLinear f1_line(std::move(xs), std::move(ys));

    std::vector<PathSample> paths(cfg.num_paths);
    std::vector<char> over(cfg.num_paths, 0);
    for_each_path(cfg.num_paths, cfg.threads, [&](std::size_t p) {
        Philox4x32 rng(cfg.seed, p);
        std::normal_distribution<double> nd(0.0, 1.0);
        const double b = std::sqrt(t0) * nd(rng);
        if (res.cantor.contains(b) && rng.uniform() < normal::pdf(b) / normal::pdf(b, t0)) {
            paths[p] = {b, t0};
            return;
        }
        const auto r = detail::run_continuum(f1_line, b, cfg.time_step, cfg.max_time, rng, nd);
        paths[p] = {r.x, t0 + r.s};
        over[p] = r.over ? 1 : 0;
    });
    return detail::collect(std::move(paths), std::move(over), cfg.seed);
}

/// Samples Z = X + phi(X) Y with X, Y independent standard Gaussians.
inline EmpiricalMeasure simulate_counterexample(const std::function<double(double)>& phi, std::size_t num_paths,
                                                std::uint64_t seed, unsigned threads = 0) {
    if (num_paths < 1) throw PreconditionError("simulate_counterexample: num_paths must be >= 1");
    std::vector<double> z(num_paths);
    for_each_path(num_paths, threads, [&](std::size_t p) {
        Philox4x32 rng(seed, p);
        std::normal_distribution<double> nd(0.0, 1.0);
        const double x = nd(rng);
        const double y = nd(rng);
        z[p] = x + phi(x) * y;
    });
    return {std::move(z), seed};
}

struct CounterexampleSample {
    EmpiricalMeasure z;
    double target_variance = 0.0;  ///< C: Z should be N(0, C)
    [[nodiscard]] double target_cdf(double x) const { return normal::cdf(x, target_variance); }
    [[nodiscard]] double ks() const {
        return ks_distance(z, [this](double x) { return target_cdf(x); });
    }
};

inline CounterexampleSample simulate_counterexample(const CantelliResult& res, const PathSimConfig& cfg) {
    cfg.validate();
    return {simulate_counterexample([&res](double x) { return res.phi(x); }, cfg.num_paths, cfg.seed, cfg.threads),
            res.C};
}

/// CSV with columns position, time in path order.
inline void write_samples_csv(std::ostream& os, const SimulationResult& r) {
    const auto prec = os.precision(17);
    os << "position,time\n";
    for (const auto& p : r.paths) os << p.position << ',' << p.time << '\n';
    os.precision(prec);
}

}  // namespace btransport
