#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace btransport {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    unsigned max_depth = 20;
    /// Panels wider than this are cut into equal pieces before the adaptive
    /// loop starts, so a single rule cannot step over a narrow bump. 0 = off.
    double max_panel = 0.0;
};

namespace detail {

struct RuleResult {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

/// One 15-point Kronrod / 7-point Gauss evaluation on [a, b], using the node
/// tables from Boost. The error estimate is in the units of the integral.
template <class F>
RuleResult gk15(F& f, double a, double b) {
    using boost::math::quadrature::gauss;
    using boost::math::quadrature::gauss_kronrod;
    const auto& x = gauss_kronrod<double, 15>::abscissa();
    const auto& wk = gauss_kronrod<double, 15>::weights();
    const auto& wg = gauss<double, 7>::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(mid);
    double k = fc * wk[0];
    double g = fc * wg[0];
    double l1 = std::abs(fc) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double fp = f(mid + half * x[i]);
        const double fm = f(mid - half * x[i]);
        k += (fp + fm) * wk[i];
        l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
        if (i % 2 == 0) g += (fp + fm) * wg[i / 2];
    }
    const double value = half * k;
    const double err = std::max(half * std::abs(k - g), 50.0 * std::numeric_limits<double>::epsilon() * half * l1);
    return {value, err, half * l1};
}

/// Bisects until the local error estimate meets the absolute tolerance.
template <class F>
RuleResult adaptive(F& f, double a, double b, double tol, unsigned depth) {
    const RuleResult r = gk15(f, a, b);
    if (r.error <= tol || depth == 0 || !std::isfinite(r.value)) return r;
    const double mid = 0.5 * (a + b);
    const RuleResult left = adaptive(f, a, mid, 0.5 * tol, depth - 1);
    const RuleResult right = adaptive(f, mid, b, 0.5 * tol, depth - 1);
    return {left.value + right.value, left.error + right.error, left.l1 + right.l1};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod over [a, b], split at every breakpoint inside the
/// range so that jump discontinuities never sit inside a panel. The tolerance
/// is absolute and is shared between panels in proportion to their length.
/// `breaks` must be sorted.
template <class F>
double integrate(F&& f, double a, double b, std::span<const double> breaks,
                 const QuadratureSpec& spec = {}) {
    if (!(a < b)) return 0.0;

    auto first = std::upper_bound(breaks.begin(), breaks.end(), a);
    auto last = std::lower_bound(first, breaks.end(), b);

    double total = 0.0;
    double total_err = 0.0;
    double total_l1 = 0.0;
    double left = a;
    const double width = b - a;
    auto panel = [&](double lo, double hi) {
        if (!(lo < hi)) return;
        const std::size_t pieces =
            spec.max_panel > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / spec.max_panel)) : 1;
        for (std::size_t j = 0; j < pieces; ++j) {
            const double plo = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(pieces);
            const double pend = j + 1 == pieces ? hi : lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(pieces);
            const auto r = detail::adaptive(f, plo, pend, spec.abs_tol * (pend - plo) / width, spec.max_depth);
            total += r.value;
            total_err += r.error;
            total_l1 += r.l1;
        }
    };
    for (auto it = first; it != last; ++it) {
        panel(left, *it);
        left = *it;
    }
    panel(left, b);

    if (!(total_err <= spec.abs_tol * std::max(1.0, total_l1)) || !std::isfinite(total)) {
        std::ostringstream msg;
        msg << "quadrature on [" << a << ", " << b << "] did not converge: error estimate "
            << total_err << " exceeds tolerance " << spec.abs_tol;
        throw NumericError(msg.str());
    }
    return total;
}

template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    return integrate(std::forward<F>(f), a, b, std::span<const double>{}, spec);
}

}  // namespace btransport
