#include "itrack/plot.hpp"

#include "itrack/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace itrack::plot {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 360;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 36;
constexpr double kBottom = 48;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string num(double v) {
    // Two decimals is plenty for pixel coordinates and keeps files small.
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi - lo < 1e-300) {
            const double pad = std::max(1e-12, std::abs(lo) * 0.05);
            lo -= pad;
            hi += pad;
        }
    }
};

struct Frame {
    Range xr, yr;
    double px(double x) const { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom); }
};

std::string tick_label(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

void header(std::ostringstream& out, const Axes& axes) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(axes.title) << "</text>\n";
}

void axes_and_ticks(std::ostringstream& out, const Axes& axes, const Frame& f) {
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
        << num(y0 - y1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double v = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
        const double y = f.py(v);
        out << "<line x1=\"" << num(x0) << "\" x2=\"" << num(x1) << "\" y1=\"" << num(y) << "\" y2=\"" << num(y)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_label(v)
            << "</text>\n";
    }
    if (!axes.x_ticks.empty()) {
        for (const auto& [x, label] : axes.x_ticks) {
            out << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(y0 + 14) << "\" text-anchor=\"middle\">"
                << escape(label) << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            const double v = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 4.0;
            out << "<text x=\"" << num(f.px(v)) << "\" y=\"" << num(y0 + 14) << "\" text-anchor=\"middle\">"
                << tick_label(v) << "</text>\n";
        }
    }
    out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 10) << "\" text-anchor=\"middle\">"
        << escape(axes.x_label) << "</text>\n";
    out << "<text transform=\"translate(14," << num((y0 + y1) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(axes.y_label) << "</text>\n";
}

std::string polyline(const Frame& f, const std::vector<double>& x, const std::vector<double>& y) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(y[i])) continue;
        pts << num(f.px(x[i])) << ',' << num(f.py(y[i])) << ' ';
    }
    return pts.str();
}

}  // namespace

std::string line_chart(const Axes& axes, const std::vector<Series>& series, const std::optional<Band>& band) {
    Frame f;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw Error("line_chart: series '" + s.label + "' has mismatched lengths");
        for (double v : s.x) f.xr.add(v);
        for (double v : s.y) f.yr.add(v);
    }
    if (band) {
        if (band->x.size() != band->lower.size() || band->x.size() != band->upper.size()) {
            throw Error("line_chart: band has mismatched lengths");
        }
        for (double v : band->x) f.xr.add(v);
        for (double v : band->lower) f.yr.add(v);
        for (double v : band->upper) f.yr.add(v);
    }
    f.xr.settle();
    f.yr.settle();

    std::ostringstream out;
    header(out, axes);
    axes_and_ticks(out, axes, f);
    if (band && !band->x.empty()) {
        std::vector<double> xs = band->x, ys = band->upper;
        xs.insert(xs.end(), band->x.rbegin(), band->x.rend());
        ys.insert(ys.end(), band->lower.rbegin(), band->lower.rend());
        out << "<polygon points=\"" << polyline(f, xs, ys) << "\" fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << "<polyline points=\"" << polyline(f, series[i].x, series[i].y) << "\" fill=\"none\" stroke=\""
            << colour(i) << "\" stroke-width=\"1.2\"/>\n";
    }
    double ly = kTop + 14;
    auto legend = [&](const std::string& label, const char* c, double opacity) {
        out << "<rect x=\"" << num(kLeft + 10) << "\" y=\"" << num(ly - 8) << "\" width=\"12\" height=\"8\" fill=\"" << c
            << "\" fill-opacity=\"" << num(opacity) << "\"/>\n";
        out << "<text x=\"" << num(kLeft + 26) << "\" y=\"" << num(ly) << "\">" << escape(label) << "</text>\n";
        ly += 14;
    };
    for (std::size_t i = 0; i < series.size(); ++i) legend(series[i].label, colour(i), 1.0);
    if (band) legend(band->label, kPalette[0], 0.2);
    out << "</svg>\n";
    return out.str();
}

std::string bar_chart(const Axes& axes, const std::vector<double>& values, const std::vector<int>& groups) {
    if (!groups.empty() && groups.size() != values.size()) throw Error("bar_chart: groups must align with values");
    Frame f;
    f.xr.add(0.0);
    f.xr.add(static_cast<double>(std::max<std::size_t>(values.size(), 1)));
    f.yr.add(0.0);
    for (double v : values) f.yr.add(v);
    f.yr.settle();

    std::ostringstream out;
    header(out, axes);
    axes_and_ticks(out, axes, f);
    const double bw = std::max(0.5, (f.px(1.0) - f.px(0.0)) * 0.9);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0.0) continue;
        const double x = f.px(static_cast<double>(i));
        const double y = f.py(values[i]);
        const double base = f.py(0.0);
        out << "<rect x=\"" << num(x) << "\" y=\"" << num(std::min(y, base)) << "\" width=\"" << num(bw)
            << "\" height=\"" << num(std::abs(base - y)) << "\" fill=\""
            << colour(groups.empty() ? 0 : static_cast<std::size_t>(groups[i])) << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string stack(const std::vector<std::string>& panels) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << num(kHeight * static_cast<double>(panels.size())) << "\">\n";
    for (std::size_t i = 0; i < panels.size(); ++i) {
        out << "<g transform=\"translate(0," << num(kHeight * static_cast<double>(i)) << ")\">\n"
            << panels[i] << "</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace itrack::plot
