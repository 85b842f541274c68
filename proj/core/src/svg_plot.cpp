#include "terra/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "terra/csv.hpp"
#include "terra/error.hpp"

namespace terra::svg {

namespace {

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
    double span() const { return hi - lo; }
};

// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= f * mag) return f * mag;
    }
    return 10.0 * mag;
}

std::string num(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render(const Plot& plot) {
    const double left = 80.0;
    const double right = 20.0;
    const double top = 40.0;
    const double bottom = 60.0;
    const double w = plot.width - left - right;
    const double h = plot.height - top - bottom;

    Range xr;
    Range yr;
    for (const auto& s : plot.series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) yr.add(v);
    }
    for (const auto& b : plot.bands) {
        for (double v : b.x) xr.add(v);
        for (double v : b.lower) yr.add(v);
        for (double v : b.upper) yr.add(v);
    }
    xr.pad();
    yr.pad();
    if (plot.equal_aspect) {
        const double scale = std::max(xr.span() / w, yr.span() / h);
        const double cx = 0.5 * (xr.lo + xr.hi);
        const double cy = 0.5 * (yr.lo + yr.hi);
        xr = Range{cx - 0.5 * scale * w, cx + 0.5 * scale * w};
        yr = Range{cy - 0.5 * scale * h, cy + 0.5 * scale * h};
    }
    auto px = [&](double x) { return left + (x - xr.lo) / xr.span() * w; };
    auto py = [&](double y) { return top + h - (y - yr.lo) / yr.span() * h; };

    std::ostringstream out;
    out.precision(2);
    out << std::fixed;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\""
        << plot.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << plot.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(plot.title) << "</text>\n";

    const double xs = nice_step(xr.span(), 8);
    for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi; t += xs) {
        out << "<line x1=\"" << px(t) << "\" y1=\"" << top << "\" x2=\"" << px(t) << "\" y2=\""
            << top + h << "\" stroke=\"#e0e0e0\"/>\n";
        out << "<text x=\"" << px(t) << "\" y=\"" << top + h + 16
            << "\" text-anchor=\"middle\">" << num(std::abs(t) < 1e-12 * xs ? 0.0 : t) << "</text>\n";
    }
    const double ys = nice_step(yr.span(), 6);
    for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi; t += ys) {
        out << "<line x1=\"" << left << "\" y1=\"" << py(t) << "\" x2=\"" << left + w << "\" y2=\""
            << py(t) << "\" stroke=\"#e0e0e0\"/>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
            << num(std::abs(t) < 1e-12 * ys ? 0.0 : t) << "</text>\n";
    }
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left + w / 2 << "\" y=\"" << plot.height - 16
        << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
    out << "<text transform=\"translate(18," << top + h / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

    for (const auto& b : plot.bands) {
        out << "<polygon fill=\"" << b.color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < b.x.size(); ++i) out << px(b.x[i]) << ',' << py(b.upper[i]) << ' ';
        for (std::size_t i = b.x.size(); i-- > 0;) out << px(b.x[i]) << ',' << py(b.lower[i]) << ' ';
        out << "\"/>\n";
    }
    for (const auto& s : plot.series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
        if (s.dashed) out << " stroke-dasharray=\"6,4\"";
        out << " points=\"";
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        }
        out << "\"/>\n";
    }
    double ly = top + 14;
    for (const auto& s : plot.series) {
        const double lx = left + w - 170;
        out << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24 << "\" y2=\""
            << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
            << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        out << "<text x=\"" << lx + 30 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
    return out.str();
}

void write(const Plot& plot, const std::string& path) {
    csv::ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << render(plot);
}

} // namespace terra::svg
