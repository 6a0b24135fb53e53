#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace btransport {

/// Closed interval [lo, hi]; infinite endpoints allowed.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Interval whole_line() { return {}; }

    [[nodiscard]] double length() const { return hi - lo; }
    [[nodiscard]] bool empty() const { return !(lo <= hi); }
    [[nodiscard]] bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
    [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }

    [[nodiscard]] Interval intersect(const Interval& o) const {
        return {std::max(lo, o.lo), std::min(hi, o.hi)};
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace btransport
