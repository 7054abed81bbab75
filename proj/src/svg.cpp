#include "nozzle/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nozzle {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 230.0;  // legend column
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                         "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v, const char* fmt = "%.2f") {
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

struct Axis {
    double lo, hi;  // log10 range, whole decades
    double px0, px1;
    double map(double v) const { return px0 + (std::log10(v) - lo) / (hi - lo) * (px1 - px0); }
};

Axis decades(double vmin, double vmax, double px0, double px1) {
    double lo = std::floor(std::log10(vmin));
    double hi = std::ceil(std::log10(vmax));
    if (hi <= lo) hi = lo + 1.0;
    return {lo, hi, px0, px1};
}

}  // namespace

std::string convergence_svg(const std::string& title, const std::vector<double>& gammas,
                            const std::vector<PlotSeries>& series) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
    for (double g : gammas) {
        xmin = std::min(xmin, 1.0 / g);
        xmax = std::max(xmax, 1.0 / g);
    }
    double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
    for (const auto& s : series)
        for (double v : s.y)
            if (v > 0.0 && std::isfinite(v)) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
    if (!(xmax > 0.0)) xmin = 0.1, xmax = 1.0;
    if (!(ymax > 0.0)) ymin = 0.1, ymax = 1.0;

    const Axis ax = decades(xmin, xmax, kLeft, kWidth - kRight);
    const Axis ay = decades(ymin, ymax, kHeight - kBottom, kTop);

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    o << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">"
      << escape(title) << "</text>\n";
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kRight - kLeft)
      << "\" height=\"" << num(kHeight - kBottom - kTop) << "\" fill=\"none\" stroke=\"black\"/>\n";

    o << "<g class=\"ticks\" font-size=\"12\">\n";
    for (double d = ax.lo; d <= ax.hi + 1e-9; d += 1.0) {
        const double x = ax.map(std::pow(10.0, d));
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(kTop) << "\" stroke=\"#dddddd\"/>\n";
        o << "<text x=\"" << num(x) << "\" y=\"" << num(kHeight - kBottom + 20) << "\" text-anchor=\"middle\">1e"
          << static_cast<int>(d) << "</text>\n";
    }
    for (double d = ay.lo; d <= ay.hi + 1e-9; d += 1.0) {
        const double y = ay.map(std::pow(10.0, d));
        o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\""
          << num(y) << "\" stroke=\"#dddddd\"/>\n";
        o << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e"
          << static_cast<int>(d) << "</text>\n";
    }
    o << "</g>\n";
    o << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 20)
      << "\" text-anchor=\"middle\" font-size=\"14\">1/gamma</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const PlotSeries& s = series[k];
        const char* color = kColors[k % std::size(kColors)];
        o << "<polyline class=\"metric\" data-name=\"" << escape(s.name) << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < gammas.size() && i < s.y.size(); ++i) {
            if (!(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
            o << (first ? "" : " ") << num(ax.map(1.0 / gammas[i])) << "," << num(ay.map(s.y[i]));
            first = false;
        }
        o << "\"/>\n";
        const double ly = kTop + 20.0 + 22.0 * static_cast<double>(k);
        const double lx = kWidth - kRight + 15.0;
        o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 20) << "\" y2=\""
          << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly) << "\" font-size=\"12\">" << escape(s.name);
        if (s.slope) o << " (slope " << num(*s.slope, "%.3f") << ")";
        o << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_convergence_svg(const std::filesystem::path& path, const std::string& title,
                           const std::vector<double>& gammas, const std::vector<PlotSeries>& series) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << convergence_svg(title, gammas, series);
}

}  // namespace nozzle
