#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "error.hpp"
#include "normal.hpp"

namespace btransport {

struct HermiteReport {
    int max_n = 0;
    /// c_n = E[h(X) He_n(X)] / sqrt(n!), the coefficients in the orthonormal
    /// basis. The expansion h = sum_n h_n He_n / n! has h_n = sqrt(n!) c_n and
    /// h_n^2 / n! = c_n^2.
    std::vector<double> c;
    double h0 = 0.0;
    double h1 = 0.0;
    double h2 = 0.0;
    double variance = 0.0;            ///< E[h^2] - h0^2
    double residual = 0.0;            ///< |-2 h2 - sum_{n=2}^{max_n} h_n^2 / n!|
    double signed_residual = 0.0;     ///< -2 h2 - sum_{n=2}^{max_n} h_n^2 / n!
    double tail = 0.0;                ///< sum_{n > max_n} h_n^2 / n!, from Parseval
    double completed_residual = 0.0;  ///< signed residual with the tail included
    double ess_sup_excess = 0.0;      ///< max over the grid of h - (h0 + 1)
};

/// Gaussian-weighted Hermite projection of h on [-L, L] (L = 12 by default),
/// integrated panel by panel with Gauss-Legendre rules between the given
/// breakpoints, where h may jump or kink.
inline HermiteReport hermite_check(const std::function<double(double)>& h, int max_n,
                                   std::span<const double> breakpoints, double half_width = 12.0,
                                   double max_panel = 0.05) {
    if (max_n < 8) throw PreconditionError("hermite_check: max_n must be >= 8");
    std::vector<double> pts{-half_width, half_width};
    for (double b : breakpoints)
        if (b > -half_width && b < half_width) pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    HermiteReport r;
    r.max_n = max_n;
    const std::size_t N = static_cast<std::size_t>(max_n) + 1;
    std::vector<double> acc(N, 0.0);
    std::vector<double> he(N);
    double second = 0.0;
    double sup_h = -std::numeric_limits<double>::infinity();

    using Rule = boost::math::quadrature::gauss<double, 20>;
    const auto& ax = Rule::abscissa();
    const auto& wt = Rule::weights();
    auto add = [&](double x, double w) {
        const double v = h(x);
        const double wv = w * v * normal::pdf(x);
        // Orthonormal recurrence: e_{k+1} = (x e_k - sqrt(k) e_{k-1}) / sqrt(k+1).
        he[0] = 1.0;
        he[1] = x;
        for (std::size_t k = 1; k + 1 < N; ++k)
            he[k + 1] = (x * he[k] - std::sqrt(static_cast<double>(k)) * he[k - 1]) / std::sqrt(static_cast<double>(k + 1));
        for (std::size_t k = 0; k < N; ++k) acc[k] += wv * he[k];
        second += wv * v;
    };
    for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
        const double a = pts[p], b = pts[p + 1];
        const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
        for (int j = 0; j < pieces; ++j) {
            const double lo = a + (b - a) * j / pieces, hi = a + (b - a) * (j + 1) / pieces;
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            // An even-order rule stores only the positive nodes; no center node.
            for (std::size_t i = 0; i < ax.size(); ++i) {
                add(mid + half * ax[i], half * wt[i]);
                add(mid - half * ax[i], half * wt[i]);
            }
            // Grid for the ess-sup check: panel interiors only, so values on
            // measure-zero sets such as jump points do not count.
            sup_h = std::max(sup_h, h(mid));
        }
    }
    if (!std::all_of(acc.begin(), acc.end(), [](double v) { return std::isfinite(v); }))
        throw NumericError("hermite_check: non-finite coefficient");

    r.c = acc;
    r.h0 = acc[0];
    r.h1 = acc[1];
    r.h2 = std::sqrt(2.0) * acc[2];
    r.variance = second - acc[0] * acc[0];
    double sum = 0.0;
    for (std::size_t k = 2; k < N; ++k) sum += acc[k] * acc[k];
    r.signed_residual = -2.0 * r.h2 - sum;
    r.residual = std::abs(r.signed_residual);
    r.tail = std::max(0.0, r.variance - acc[1] * acc[1] - sum);
    r.completed_residual = r.signed_residual - r.tail;
    r.ess_sup_excess = sup_h - (r.h0 + 1.0);
    return r;
}

}  // namespace btransport
