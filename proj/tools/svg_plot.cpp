#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rffi/errors.hpp"

namespace rffi::cli {
namespace {

constexpr double kW = 640.0, kH = 420.0;
constexpr double kLeft = 70.0, kRight = 30.0, kTop = 50.0, kBottom = 55.0;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Round tick spacing to 1/2/5 x 10^k covering roughly `target` intervals.
std::vector<double> ticks(double lo, double hi, int target = 5) {
    const double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / target)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (span / (step * m) <= target) {
            step *= m;
            break;
        }
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
        out.push_back(t);
    return out;
}

} // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    std::size_t n_points = 0;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw ConfigError("plot series length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
            ++n_points;
        }
    }
    if (n_points == 0) throw ConfigError("plot has no data points");
    // Pad degenerate ranges so the mapping below stays finite.
    if (xhi - xlo < 1e-12) { xlo -= 0.5; xhi += 0.5; }
    if (yhi - ylo < 1e-12) { ylo -= 0.5; yhi += 0.5; }
    const double xpad = 0.05 * (xhi - xlo), ypad = 0.05 * (yhi - ylo);
    xlo -= xpad; xhi += xpad; ylo -= ypad; yhi += ypad;

    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
    auto py = [&](double y) { return kTop + (yhi - y) / (yhi - ylo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\">" << title << "</text>\n";

    for (double t : ticks(xlo, xhi)) {
        const double x = px(t);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << kTop << "\" x2=\"" << num(x) << "\" y2=\""
          << kTop + ph << "\" stroke=\"#dddddd\"/>\n"
          << "<text x=\"" << num(x) << "\" y=\"" << kTop + ph + 18
          << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" << num(t)
          << "</text>\n";
    }
    for (double t : ticks(ylo, yhi)) {
        const double y = py(t);
        o << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft + pw
          << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n"
          << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4)
          << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" << num(t)
          << "</text>\n";
    }
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 14
      << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">" << xlabel
      << "</text>\n"
      << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" font-size=\"13\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">"
      << ylabel << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % 8];
        // Draw in x order so lines read left to right regardless of input order.
        std::vector<std::size_t> idx(s.x.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i : idx) o << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
        o << "\"/>\n";
        for (std::size_t i : idx)
            o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
              << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        const double ly = kTop + 14 + 16.0 * static_cast<double>(si);
        o << "<line x1=\"" << kLeft + pw - 120 << "\" y1=\"" << num(ly - 4) << "\" x2=\""
          << kLeft + pw - 96 << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n"
          << "<text x=\"" << kLeft + pw - 90 << "\" y=\"" << num(ly)
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.label << "</text>\n";
    }
    o << "</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write plot file: " + path);
    f << o.str();
}

} // namespace rffi::cli
