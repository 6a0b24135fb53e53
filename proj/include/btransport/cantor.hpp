#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"
#include "interval.hpp"

namespace btransport {

using Rational = boost::multiprecision::cpp_rational;

/// Fat Cantor set: start from the ambient interval and, at step n, remove the
/// open middle 1/(n+1)^2 part of every remaining interval. Endpoints are kept
/// exactly in unit coordinates ([0, 1] maps affinely onto the ambient).
class CantorSet {
public:
    struct UnitInterval {
        Rational lo, hi;
    };

    CantorSet(Interval ambient, int depth) : ambient_(ambient), depth_(depth) {
        if (!ambient.bounded() || !(ambient.lo < ambient.hi))
            throw PreconditionError("build_cantor: ambient interval must be bounded and nonempty");
        if (depth < 0) throw PreconditionError("build_cantor: depth must be >= 0");
        if (depth > 24) throw PreconditionError("build_cantor: depth above 24 is not supported");

        unit_.push_back({Rational(0), Rational(1)});
        for (int n = 1; n <= depth; ++n) {
            const Rational removed(1, (n + 1) * (n + 1));
            std::vector<UnitInterval> next;
            next.reserve(unit_.size() * 2);
            for (const auto& iv : unit_) {
                const Rational len = iv.hi - iv.lo;
                const Rational keep = (len - len * removed) / 2;
                next.push_back({iv.lo, iv.lo + keep});
                next.push_back({iv.hi - keep, iv.hi});
            }
            unit_ = std::move(next);
        }

        lo_.reserve(unit_.size());
        hi_.reserve(unit_.size());
        for (const auto& iv : unit_) {
            lo_.push_back(to_ambient(iv.lo));
            hi_.push_back(to_ambient(iv.hi));
        }
    }

    [[nodiscard]] const Interval& ambient() const { return ambient_; }
    [[nodiscard]] int depth() const { return depth_; }
    [[nodiscard]] std::size_t size() const { return unit_.size(); }
    [[nodiscard]] const std::vector<UnitInterval>& unit_intervals() const { return unit_; }
    [[nodiscard]] Interval interval(std::size_t i) const { return {lo_[i], hi_[i]}; }
    [[nodiscard]] const std::vector<double>& left_ends() const { return lo_; }
    [[nodiscard]] const std::vector<double>& right_ends() const { return hi_; }

    /// Exact total length in unit coordinates.
    [[nodiscard]] Rational unit_length() const {
        Rational s = 0;
        for (const auto& iv : unit_) s += iv.hi - iv.lo;
        return s;
    }

    [[nodiscard]] double total_length() const {
        return static_cast<double>(unit_length()) * ambient_.length();
    }

    /// Length of the finest remaining intervals (all have the same length).
    [[nodiscard]] double piece_length() const { return hi_.front() - lo_.front(); }

    [[nodiscard]] bool contains(double x) const {
        auto it = std::upper_bound(lo_.begin(), lo_.end(), x);
        if (it == lo_.begin()) return false;
        const auto i = static_cast<std::size_t>(it - lo_.begin()) - 1;
        return x <= hi_[i];
    }

    /// Lebesgue measure of [a, b] intersected with the set.
    [[nodiscard]] double covered_length(double a, double b) const {
        if (!(a < b)) return 0.0;
        double s = 0.0;
        auto it = std::upper_bound(hi_.begin(), hi_.end(), a);
        for (auto i = static_cast<std::size_t>(it - hi_.begin()); i < lo_.size() && lo_[i] < b; ++i)
            s += std::max(0.0, std::min(b, hi_[i]) - std::max(a, lo_[i]));
        return s;
    }

    /// Lebesgue measure of [a, b] minus the set.
    [[nodiscard]] double gap_length(double a, double b) const {
        return std::max(0.0, (b - a) - covered_length(a, b));
    }

    /// Endpoints of all intervals, sorted.
    [[nodiscard]] std::vector<double> endpoints() const {
        std::vector<double> e;
        e.reserve(2 * lo_.size());
        for (std::size_t i = 0; i < lo_.size(); ++i) {
            e.push_back(lo_[i]);
            e.push_back(hi_[i]);
        }
        return e;
    }

private:
    [[nodiscard]] double to_ambient(const Rational& u) const {
        return ambient_.lo + static_cast<double>(u) * ambient_.length();
    }

    Interval ambient_;
    int depth_;
    std::vector<UnitInterval> unit_;
    std::vector<double> lo_, hi_;
};

inline CantorSet build_cantor(Interval ambient, int depth) { return CantorSet(ambient, depth); }

/// prod_{n=1}^{depth} (1 - 1/(n+1)^2), exactly.
inline Rational cantor_length_factor(int depth) {
    Rational p = 1;
    for (int n = 1; n <= depth; ++n) p *= Rational(n * (n + 2), (n + 1) * (n + 1));
    return p;
}

struct GapConstants {
    double alpha_quadratic = 0.0;  ///< largest a with Leb(I \ K) >= a |I|^2 on every sample
    double alpha_exp = 0.0;        ///< smallest a with Leb(I \ K) >= exp(-a / |I|) on every sample
    double min_length = 0.0;       ///< shortest sampled |I|
    int samples = 0;
    [[nodiscard]] bool satisfies_hypothesis() const {
        return alpha_quadratic > 0.0 && std::isfinite(alpha_exp);
    }
};

/// Samples random subintervals of the ambient and reports the gap constants.
/// Lengths are log-uniform between twice the finest piece (the smallest scale a
/// finite-depth set resolves) and the ambient length.
inline GapConstants cantor_gap_constants(const CantorSet& K, int samples, std::uint64_t seed = 1) {
    GapConstants g;
    g.samples = samples;
    if (samples <= 0) return g;
    const double amb = K.ambient().length();
    const double min_len = std::min(amb, 2.0 * K.piece_length());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    g.alpha_quadratic = std::numeric_limits<double>::infinity();
    g.alpha_exp = 0.0;
    g.min_length = amb;
    for (int i = 0; i < samples; ++i) {
        const double len = min_len * std::pow(amb / min_len, unit(rng));
        const double a = K.ambient().lo + (amb - len) * unit(rng);
        const double gap = K.gap_length(a, a + len);
        g.min_length = std::min(g.min_length, len);
        g.alpha_quadratic = std::min(g.alpha_quadratic, gap / (len * len));
        const double ae = gap > 0.0 ? -len * std::log(std::min(gap, 1.0)) : std::numeric_limits<double>::infinity();
        g.alpha_exp = std::max(g.alpha_exp, ae);
    }
    return g;
}

/// CSV with columns left, right.
inline void write_cantor_csv(std::ostream& os, const CantorSet& K) {
    const auto prec = os.precision(17);
    os << "left,right\n";
    for (std::size_t i = 0; i < K.size(); ++i) os << K.left_ends()[i] << ',' << K.right_ends()[i] << '\n';
    os.precision(prec);
}

}  // namespace btransport
