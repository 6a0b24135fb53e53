#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "error.hpp"

namespace btransport {

/// Continuous piecewise-linear function through sorted nodes, extended by
/// constants outside the node range.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;

    PiecewiseLinear(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
        if (xs_.size() != ys_.size()) throw PreconditionError("PiecewiseLinear: node/value size mismatch");
        if (xs_.empty()) throw PreconditionError("PiecewiseLinear: no nodes");
        for (std::size_t i = 1; i < xs_.size(); ++i)
            if (!(xs_[i - 1] < xs_[i])) throw PreconditionError("PiecewiseLinear: nodes must be strictly increasing");
    }

    [[nodiscard]] double operator()(double x) const {
        if (x <= xs_.front()) return ys_.front();
        if (x >= xs_.back()) return ys_.back();
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const auto i = static_cast<std::size_t>(it - xs_.begin());
        const double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
        return ys_[i - 1] + w * (ys_[i] - ys_[i - 1]);
    }

    [[nodiscard]] const std::vector<double>& nodes() const { return xs_; }
    [[nodiscard]] const std::vector<double>& values() const { return ys_; }
    [[nodiscard]] bool empty() const { return xs_.empty(); }
    [[nodiscard]] double lo() const { return xs_.front(); }
    [[nodiscard]] double hi() const { return xs_.back(); }

    [[nodiscard]] double max_value() const { return *std::max_element(ys_.begin(), ys_.end()); }
    [[nodiscard]] double min_value() const { return *std::min_element(ys_.begin(), ys_.end()); }

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
};

/// Largest |a(x) - b(x)| over the nodes of `a`.
inline double sup_distance_on_nodes(const PiecewiseLinear& a, const PiecewiseLinear& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.nodes().size(); ++i) d = std::max(d, std::abs(a.values()[i] - b(a.nodes()[i])));
    return d;
}

}  // namespace btransport
