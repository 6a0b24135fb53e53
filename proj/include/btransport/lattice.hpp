#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "measures.hpp"

namespace btransport {

/// Nonnegative masses on the grid (1/n)Z. Cell i of `masses` sits at lattice
/// index offset + i, i.e. at position (offset + i) / n.
class LatticeMeasure {
public:
    LatticeMeasure() = default;

    LatticeMeasure(int mesh_n, long offset, std::vector<double> masses)
        : n_(mesh_n), offset_(offset), masses_(std::move(masses)) {
        if (n_ < 1) throw PreconditionError("LatticeMeasure: mesh n must be >= 1");
        for (std::size_t i = 0; i < masses_.size(); ++i) {
            if (!(masses_[i] >= 0.0) || !std::isfinite(masses_[i])) {
                std::ostringstream msg;
                msg << "LatticeMeasure: invalid mass " << masses_[i] << " at index " << offset_ + static_cast<long>(i);
                throw PreconditionError(msg.str());
            }
        }
    }

    [[nodiscard]] int mesh() const { return n_; }
    [[nodiscard]] long offset() const { return offset_; }
    [[nodiscard]] long first_index() const { return offset_; }
    [[nodiscard]] long last_index() const { return offset_ + static_cast<long>(masses_.size()) - 1; }
    [[nodiscard]] std::size_t size() const { return masses_.size(); }
    [[nodiscard]] const std::vector<double>& masses() const { return masses_; }

    [[nodiscard]] double position(long k) const { return static_cast<double>(k) / n_; }

    /// Mass at lattice index k; zero outside the window.
    [[nodiscard]] double at(long k) const {
        const long i = k - offset_;
        return (i >= 0 && i < static_cast<long>(masses_.size())) ? masses_[static_cast<std::size_t>(i)] : 0.0;
    }

    [[nodiscard]] double total() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

    /// Smallest and largest index carrying positive mass.
    [[nodiscard]] std::pair<long, long> support() const {
        long lo = last_index() + 1, hi = first_index() - 1;
        for (std::size_t i = 0; i < masses_.size(); ++i) {
            if (masses_[i] > 0.0) {
                lo = std::min(lo, offset_ + static_cast<long>(i));
                hi = std::max(hi, offset_ + static_cast<long>(i));
            }
        }
        return {lo, hi};
    }

    /// Mean in index units (normalized by the total mass).
    [[nodiscard]] double index_mean() const {
        double s = 0.0;
        for (std::size_t i = 0; i < masses_.size(); ++i) s += static_cast<double>(offset_ + static_cast<long>(i)) * masses_[i];
        return s / total();
    }

    [[nodiscard]] double index_variance() const {
        const double mu = index_mean();
        double s = 0.0;
        for (std::size_t i = 0; i < masses_.size(); ++i) {
            const double d = static_cast<double>(offset_ + static_cast<long>(i)) - mu;
            s += d * d * masses_[i];
        }
        return s / total();
    }

    [[nodiscard]] double mean() const { return index_mean() / n_; }
    [[nodiscard]] double variance() const { return index_variance() / (static_cast<double>(n_) * n_); }

    /// Copy of the masses over the index range [lo, hi], zero-padded.
    [[nodiscard]] std::vector<double> window(long lo, long hi) const {
        std::vector<double> w(static_cast<std::size_t>(std::max(0L, hi - lo + 1)), 0.0);
        for (long k = lo; k <= hi; ++k) w[static_cast<std::size_t>(k - lo)] = at(k);
        return w;
    }

private:
    int n_ = 1;
    long offset_ = 0;
    std::vector<double> masses_;
};

/// Projects a compactly supported density onto (1/n)Z with the hat kernel
/// (1 - n|x - k/n|)_+. Hats form a partition of unity and reproduce linear
/// functions, so total mass and mean are preserved.
inline LatticeMeasure discretize(const DensityMeasure& m, int n) {
    if (n < 1) throw PreconditionError("discretize: n must be >= 1");
    if (!m.support().bounded()) throw PreconditionError("discretize: support must be bounded (truncate first)");
    const auto [a, b] = m.support();
    const long kmin = static_cast<long>(std::floor(a * n + 1e-9));
    const long kmax = static_cast<long>(std::ceil(b * n - 1e-9));
    std::vector<double> masses(static_cast<std::size_t>(kmax - kmin + 1), 0.0);
    const double nd = n;
    for (long k = kmin; k <= kmax; ++k) {
        const double xk = static_cast<double>(k) / nd;
        const auto hat = [xk, nd](double x) { return std::max(0.0, 1.0 - nd * std::abs(x - xk)); };
        const double left = m.integrate_density(hat, static_cast<double>(k - 1) / nd, xk);
        const double right = m.integrate_density(hat, xk, static_cast<double>(k + 1) / nd);
        masses[static_cast<std::size_t>(k - kmin)] = std::max(0.0, left + right);
    }
    return {n, kmin, std::move(masses)};
}

/// Sum over z < k of (k - z) m(z), in index units.
inline double phi_lattice_index(const LatticeMeasure& m, long k) {
    double s = 0.0;
    for (long z = m.first_index(); z < k && z <= m.last_index(); ++z) s += static_cast<double>(k - z) * m.at(z);
    return s;
}

/// Phi of the lattice measure at position k/n (physical units). Agrees with
/// the continuous Phi of the same atomic measure at lattice points.
inline double phi_lattice(const LatticeMeasure& m, long k) { return phi_lattice_index(m, k) / m.mesh(); }

/// Index-unit cost Phi_{mu1} - Phi_{mu0} at every index in [lo, hi], computed
/// with running sums.
inline std::vector<double> lattice_cost_profile(const LatticeMeasure& mu0, const LatticeMeasure& mu1, long lo, long hi) {
    std::vector<double> out(static_cast<std::size_t>(std::max(0L, hi - lo + 1)), 0.0);
    // Phi(k) = sum_{y<k} F(y): accumulate the difference of distribution functions.
    double cum_f = 0.0;
    double cum_phi = 0.0;
    const long start = std::min({lo, mu0.first_index(), mu1.first_index()});
    for (long k = start; k <= hi; ++k) {
        if (k >= lo) out[static_cast<std::size_t>(k - lo)] = cum_phi;
        cum_f += mu1.at(k) - mu0.at(k);
        cum_phi += cum_f;
    }
    return out;
}

/// CSV with columns cell_index, position, mass.
inline void write_lattice_csv(std::ostream& os, const LatticeMeasure& m) {
    const auto prec = os.precision(17);
    os << "cell_index,position,mass\n";
    for (long k = m.first_index(); k <= m.last_index(); ++k) os << k << ',' << m.position(k) << ',' << m.at(k) << '\n';
    os.precision(prec);
}

/// Reads the CSV written by write_lattice_csv. Cells may come in any order but
/// must be unique. The mesh is inferred from index/position unless given.
inline LatticeMeasure read_lattice_csv(std::istream& is, int mesh_n = 0) {
    std::string line;
    if (!std::getline(is, line)) throw PreconditionError("lattice CSV: empty input");
    if (line.rfind("cell_index", 0) != 0) throw PreconditionError("lattice CSV: expected header 'cell_index,position,mass'");
    std::vector<std::tuple<long, double, double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
            throw PreconditionError("lattice CSV: malformed row '" + line + "'");
        try {
            rows.emplace_back(std::stol(a), std::stod(b), std::stod(c));
        } catch (const std::exception&) {
            throw PreconditionError("lattice CSV: malformed row '" + line + "'");
        }
    }
    if (rows.empty()) throw PreconditionError("lattice CSV: no rows");
    if (mesh_n <= 0) {
        for (const auto& [k, x, mass] : rows) {
            if (k != 0 && x != 0.0) {
                mesh_n = static_cast<int>(std::lround(static_cast<double>(k) / x));
                break;
            }
        }
        if (mesh_n <= 0) mesh_n = 1;
    }
    std::sort(rows.begin(), rows.end());
    const long lo = std::get<0>(rows.front());
    const long hi = std::get<0>(rows.back());
    std::vector<double> masses(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && std::get<0>(rows[i]) == std::get<0>(rows[i - 1]))
            throw PreconditionError("lattice CSV: duplicate cell index");
        masses[static_cast<std::size_t>(std::get<0>(rows[i]) - lo)] = std::get<2>(rows[i]);
    }
    return {mesh_n, lo, std::move(masses)};
}

}  // namespace btransport
