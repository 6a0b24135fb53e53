#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "error.hpp"
#include "interval.hpp"
#include "normal.hpp"
#include "quadrature.hpp"

namespace btransport {

/// Means closer than this are treated as equal.
inline constexpr double kMeanTolerance = 1e-9;

/// Everything needed to build a DensityMeasure. Only `density` and `support`
/// are mandatory; `window` must be finite whenever the support is not.
struct DensityParts {
    std::function<double(double)> density;
    Interval support = Interval::whole_line();
    /// Finite region carrying all but a negligible amount of the mass; it
    /// bounds every quadrature. Defaults to the support.
    Interval window{};
    /// Jump discontinuities (or kinks) of the density, used to split panels.
    std::vector<double> breakpoints;
    /// Closed-form distribution function, when one is known.
    std::function<double(double)> cdf;
    QuadratureSpec quad{};
};

/// A finite measure on the real line given by an evaluable density.
/// Immutable once constructed.
class DensityMeasure {
public:
    explicit DensityMeasure(DensityParts parts) : parts_(std::move(parts)) {
        if (!parts_.density) throw PreconditionError("DensityMeasure: density is empty");
        if (parts_.support.empty()) throw PreconditionError("DensityMeasure: empty support");
        if (!parts_.window.bounded()) parts_.window = parts_.support;
        parts_.window = parts_.window.intersect(parts_.support);
        if (!parts_.window.bounded() || parts_.window.empty())
            throw PreconditionError("DensityMeasure: unbounded support needs a finite quadrature window");
        if (parts_.quad.max_panel <= 0.0) parts_.quad.max_panel = parts_.window.length() / 64.0;
        std::sort(parts_.breakpoints.begin(), parts_.breakpoints.end());
        parts_.breakpoints.erase(std::unique(parts_.breakpoints.begin(), parts_.breakpoints.end()),
                                 parts_.breakpoints.end());

        constexpr int kProbes = 257;
        const auto [lo, hi] = parts_.window;
        for (int i = 0; i < kProbes; ++i) {
            const double x = lo + (hi - lo) * i / (kProbes - 1);
            if (density(x) < 0.0) {
                std::ostringstream msg;
                msg << "DensityMeasure: negative density " << density(x) << " at x = " << x;
                throw PreconditionError(msg.str());
            }
        }
        mass_ = integrate_density([](double) { return 1.0; }, lo, hi);
        if (!(mass_ > 0.0)) throw PreconditionError("DensityMeasure: zero total mass");
    }

    /// Density at x; zero off the support.
    [[nodiscard]] double density(double x) const {
        return parts_.support.contains(x) ? parts_.density(x) : 0.0;
    }

    [[nodiscard]] const Interval& support() const { return parts_.support; }
    [[nodiscard]] const Interval& window() const { return parts_.window; }
    [[nodiscard]] const std::vector<double>& breakpoints() const { return parts_.breakpoints; }
    [[nodiscard]] const QuadratureSpec& quadrature() const { return parts_.quad; }
    [[nodiscard]] double total_mass() const { return mass_; }
    [[nodiscard]] bool has_closed_form_cdf() const { return static_cast<bool>(parts_.cdf); }
    [[nodiscard]] const DensityParts& parts() const { return parts_; }

    /// Integral of weight(x) * density(x) over [a, b] clipped to the window.
    template <class W>
    [[nodiscard]] double integrate_density(W&& weight, double a, double b) const {
        a = std::max(a, parts_.window.lo);
        b = std::min(b, parts_.window.hi);
        if (!(a < b)) return 0.0;
        return integrate([&](double x) { return weight(x) * density(x); }, a, b,
                         std::span<const double>(parts_.breakpoints), parts_.quad);
    }

    /// Distribution function. Uses the closed form when available.
    [[nodiscard]] double cdf(double x) const {
        if (parts_.cdf) return std::clamp(parts_.cdf(x), 0.0, mass_);
        if (x >= parts_.window.hi) return mass_;
        return std::clamp(integrate_density([](double) { return 1.0; }, parts_.window.lo, x), 0.0, mass_);
    }

private:
    DensityParts parts_;
    double mass_ = 0.0;
};

// ---------------------------------------------------------------------------
// Factories

inline DensityMeasure gaussian(double variance, double mean = 0.0) {
    if (!(variance > 0.0)) throw PreconditionError("gaussian: variance must be positive");
    const double sd = std::sqrt(variance);
    DensityParts p;
    p.density = [=](double x) { return normal::pdf(x - mean, variance); };
    p.window = {mean - 40.0 * sd, mean + 40.0 * sd};
    p.cdf = [=](double x) { return normal::cdf(x - mean, variance); };
    return DensityMeasure(std::move(p));
}

inline DensityMeasure uniform(double a, double b) {
    if (!(a < b)) throw PreconditionError("uniform: need a < b");
    DensityParts p;
    const double h = 1.0 / (b - a);
    p.density = [h](double) { return h; };
    p.support = {a, b};
    p.cdf = [=](double x) { return std::clamp((x - a) * h, 0.0, 1.0); };
    return DensityMeasure(std::move(p));
}

/// Symmetric triangular bump of the given mass; approximates a point mass as
/// half_width -> 0.
inline DensityMeasure triangle(double center, double half_width, double mass = 1.0) {
    if (!(half_width > 0.0) || !(mass > 0.0)) throw PreconditionError("triangle: bad parameters");
    DensityParts p;
    const double w = half_width;
    p.density = [=](double x) { return mass * std::max(0.0, 1.0 - std::abs(x - center) / w) / w; };
    p.support = {center - w, center + w};
    p.breakpoints = {center};
    p.cdf = [=](double x) {
        const double u = (x - center) / w;
        if (u <= -1.0) return 0.0;
        if (u >= 1.0) return mass;
        return u <= 0.0 ? mass * 0.5 * (1.0 + u) * (1.0 + u) : mass * (1.0 - 0.5 * (1.0 - u) * (1.0 - u));
    };
    return DensityMeasure(std::move(p));
}

/// Weighted sum of measures.
inline DensityMeasure mixture(std::vector<std::pair<double, DensityMeasure>> parts) {
    if (parts.empty()) throw PreconditionError("mixture: no components");
    DensityParts p;
    p.support = {parts.front().second.support().lo, parts.front().second.support().hi};
    p.window = parts.front().second.window();
    bool closed = true;
    for (const auto& [w, m] : parts) {
        if (!(w >= 0.0)) throw PreconditionError("mixture: negative weight");
        p.support = {std::min(p.support.lo, m.support().lo), std::max(p.support.hi, m.support().hi)};
        p.window = {std::min(p.window.lo, m.window().lo), std::max(p.window.hi, m.window().hi)};
        p.breakpoints.insert(p.breakpoints.end(), m.breakpoints().begin(), m.breakpoints().end());
        if (m.support().bounded()) {
            p.breakpoints.push_back(m.support().lo);
            p.breakpoints.push_back(m.support().hi);
        }
        closed = closed && m.has_closed_form_cdf();
    }
    p.density = [parts](double x) {
        double s = 0.0;
        for (const auto& [w, m] : parts) s += w * m.density(x);
        return s;
    };
    if (closed) {
        p.cdf = [parts](double x) {
            double s = 0.0;
            for (const auto& [w, m] : parts) s += w * m.cdf(x);
            return s;
        };
    }
    return DensityMeasure(std::move(p));
}

// ---------------------------------------------------------------------------
// Operations

inline double cdf(const DensityMeasure& m, double x) {
    if (!std::isfinite(x)) throw PreconditionError("cdf: x must be finite");
    return m.cdf(x);
}

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance of the normalized measure.
inline MeanVar mean_var(const DensityMeasure& m) {
    const auto [lo, hi] = m.window();
    const double mass = m.total_mass();
    const double mean = m.integrate_density([](double x) { return x; }, lo, hi) / mass;
    const double var = m.integrate_density([mean](double x) { return (x - mean) * (x - mean); }, lo, hi) / mass;
    if (!std::isfinite(mean) || !std::isfinite(var))
        throw NumericError("mean_var: moments diverge");
    return {mean, std::max(var, 0.0)};
}

/// Primitive of the distribution function, integral of F over (-inf, x].
inline double phi(const DensityMeasure& m, double x) {
    const auto [lo, hi] = m.window();
    if (x <= lo) return 0.0;
    const double upto = std::min(x, hi);
    double v = integrate([&m](double s) { return m.cdf(s); }, lo, upto,
                         std::span<const double>(m.breakpoints()), m.quadrature());
    if (x > hi) v += (x - hi) * m.total_mass();
    return std::max(v, 0.0);
}

/// Same quantity through the moment form, integral of (x - y) dmu(y) over y <= x.
inline double phi_moment_form(const DensityMeasure& m, double x) {
    const auto [lo, hi] = m.window();
    if (x <= lo) return 0.0;
    return std::max(m.integrate_density([x](double y) { return x - y; }, lo, std::min(x, hi)), 0.0);
}

/// Cost function x -> Phi_target(x) - Phi_source(x) between two measures with
/// equal means; nonnegative whenever a Brownian transport can exist.
class CostFunction {
public:
    CostFunction(DensityMeasure source, DensityMeasure target)
        : source_(std::move(source)), target_(std::move(target)) {
        const double m0 = mean_var(source_).mean;
        const double m1 = mean_var(target_).mean;
        if (std::abs(m0 - m1) > kMeanTolerance) {
            std::ostringstream msg;
            msg << "cost: means differ (" << m0 << " vs " << m1 << ")";
            throw PreconditionError(msg.str());
        }
    }

    [[nodiscard]] double operator()(double x) const { return phi(target_, x) - phi(source_, x); }
    [[nodiscard]] const DensityMeasure& source() const { return source_; }
    [[nodiscard]] const DensityMeasure& target() const { return target_; }

private:
    DensityMeasure source_;
    DensityMeasure target_;
};

inline double cost(const DensityMeasure& mu0, const DensityMeasure& mu1, double x) {
    return CostFunction(mu0, mu1)(x);
}

/// Restriction to [lo, hi], without renormalization.
inline DensityMeasure restrict_to(const DensityMeasure& m, Interval range) {
    DensityParts p = m.parts();
    p.support = m.support().intersect(range);
    if (p.support.empty()) throw PreconditionError("restrict_to: empty intersection with support");
    p.window = m.window().intersect(range);
    if (p.window.empty()) p.window = {p.support.lo, p.support.lo};
    if (m.has_closed_form_cdf()) {
        const double base = m.cdf(p.support.lo);
        const double top = m.cdf(p.support.hi);
        p.cdf = [m, base, top, s = p.support](double x) {
            if (x < s.lo) return 0.0;
            return std::min(m.cdf(std::min(x, s.hi)), top) - base;
        };
    }
    return DensityMeasure(std::move(p));
}

/// Multiplies the density by a constant.
inline DensityMeasure scaled(const DensityMeasure& m, double factor) {
    if (!(factor > 0.0)) throw PreconditionError("scaled: factor must be positive");
    DensityParts p = m.parts();
    p.density = [m, factor](double x) { return factor * m.density(x); };
    if (m.has_closed_form_cdf()) p.cdf = [m, factor](double x) { return factor * m.cdf(x); };
    return DensityMeasure(std::move(p));
}

/// mu restricted to [-R, R] and renormalized to a probability measure.
inline DensityMeasure truncate_normalize(const DensityMeasure& m, double R) {
    if (!(R > 0.0)) throw PreconditionError("truncate_normalize: R must be positive");
    const double inside = m.cdf(R) - m.cdf(-R);
    if (!(inside > 0.0)) throw PreconditionError("truncate_normalize: no mass in [-R, R]");
    return scaled(restrict_to(m, {-R, R}), 1.0 / inside);
}

struct GammaCentered {
    DensityMeasure measure;
    double c = 1.0;  ///< weight on the negative half-line
    double d = 1.0;  ///< weight on the positive half-line
};

/// Reweights the two half-lines so the result is a centered probability measure.
inline GammaCentered gamma_center(const DensityMeasure& m) {
    const auto [lo, hi] = m.window();
    const double neg_mass = m.cdf(0.0);
    const double pos_mass = m.total_mass() - neg_mass;
    if (!(neg_mass > 0.0) || !(pos_mass > 0.0))
        throw PreconditionError("gamma_center: measure must charge both half-lines");
    const double neg_moment = m.integrate_density([](double x) { return -x; }, lo, std::min(0.0, hi));
    const double pos_moment = m.integrate_density([](double x) { return x; }, std::max(0.0, lo), hi);
    const double det = neg_mass * pos_moment + pos_mass * neg_moment;
    if (!(det > 1e-300)) throw NumericError("gamma_center: singular centering system");
    const double c = pos_moment / det;
    const double d = neg_moment / det;

    DensityParts p = m.parts();
    p.density = [m, c, d](double x) { return (x < 0.0 ? c : d) * m.density(x); };
    p.breakpoints.push_back(0.0);
    if (m.has_closed_form_cdf()) {
        const double f0 = neg_mass;
        p.cdf = [m, c, d, f0](double x) { return x < 0.0 ? c * m.cdf(x) : c * f0 + d * (m.cdf(x) - f0); };
    }
    return {DensityMeasure(std::move(p)), c, d};
}

struct FeasibilityReport {
    bool means_equal = false;
    bool variance_nondecreasing = false;
    double mean_gap = 0.0;
    double variance_source = 0.0;
    double variance_target = 0.0;
    double min_cost = 0.0;
    double argmin_cost = 0.0;
    bool cost_nonnegative = false;

    [[nodiscard]] bool feasible() const { return means_equal && variance_nondecreasing && cost_nonnegative; }
};

/// Necessary conditions for a Brownian transport mu0 -> mu1, checked on `grid`.
inline FeasibilityReport feasibility_check(const DensityMeasure& mu0, const DensityMeasure& mu1,
                                           std::span<const double> grid, double tol = 1e-9) {
    FeasibilityReport r;
    const auto mv0 = mean_var(mu0);
    const auto mv1 = mean_var(mu1);
    r.mean_gap = mv1.mean - mv0.mean;
    r.means_equal = std::abs(r.mean_gap) <= kMeanTolerance;
    r.variance_source = mv0.variance;
    r.variance_target = mv1.variance;
    r.variance_nondecreasing = mv0.variance <= mv1.variance + tol;
    r.min_cost = std::numeric_limits<double>::infinity();
    for (double x : grid) {
        const double v = phi(mu1, x) - phi(mu0, x);
        if (v < r.min_cost) {
            r.min_cost = v;
            r.argmin_cost = x;
        }
    }
    if (grid.empty()) r.min_cost = 0.0;
    r.cost_nonnegative = r.min_cost >= -tol;
    return r;
}

/// CSV with columns x, density.
inline void write_density_csv(std::ostream& os, const DensityMeasure& m, std::span<const double> xs) {
    const auto prec = os.precision(17);
    os << "x,density\n";
    for (double x : xs) os << x << ',' << m.density(x) << '\n';
    os.precision(prec);
}

}  // namespace btransport
