#pragma once

#include <cmath>
#include <numbers>

namespace btransport::normal {

/// Density of N(0, variance).
inline double pdf(double x, double variance = 1.0) {
    return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

/// Distribution function of N(0, variance); erfc keeps the left tail accurate.
inline double cdf(double x, double variance = 1.0) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

/// Partial first moment: integral of y * pdf(y) over (-inf, x].
inline double partial_mean(double x, double variance = 1.0) {
    return -variance * pdf(x, variance);
}

}  // namespace btransport::normal
