#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include "error.hpp"

namespace btransport {

/// Minimal standalone SVG line plot with axis extents printed in the corners.
inline void write_svg_line_plot(std::ostream& os, const std::vector<double>& xs, const std::vector<double>& ys,
                                const std::string& title, int width = 800, int height = 480) {
    if (xs.size() != ys.size() || xs.empty()) throw PreconditionError("svg plot: need matching, nonempty x and y");
    const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
    const auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
    const double xmin = *xmin_it, xmax = *xmax_it;
    double ymin = *ymin_it, ymax = *ymax_it;
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double pad = 50.0;
    const double sx = (width - 2 * pad) / std::max(xmax - xmin, 1e-12);
    const double sy = (height - 2 * pad) / (ymax - ymin);
    const auto prec = os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << pad << "\" y=\"" << pad / 2 << "\" font-family=\"sans-serif\" font-size=\"14\">" << title
       << "</text>\n";
    os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << width - 2 * pad << "\" height=\""
       << height - 2 * pad << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << pad + (xs[i] - xmin) * sx << ',' << height - pad - (ys[i] - ymin) * sy << ' ';
    os << "\"/>\n";
    const auto label = [&](double x, double y, const char* anchor, double v) {
        os << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\""
           << anchor << "\">" << v << "</text>\n";
    };
    label(pad, height - pad + 15, "start", xmin);
    label(width - pad, height - pad + 15, "end", xmax);
    label(pad - 4, height - pad, "end", ymin);
    label(pad - 4, pad + 10, "end", ymax);
    os << "</svg>\n";
    os.precision(prec);
}

}  // namespace btransport
