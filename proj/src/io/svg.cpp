#include "cnpgap/io/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cnpgap::io {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 190.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct Axis {
    bool log = false;
    double lo = 0.0;  // in transformed units
    double hi = 1.0;

    double transform(double v) const { return log ? std::log10(v) : v; }
    bool placeable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            const int first = static_cast<int>(std::ceil(lo - 1e-9));
            const int last = static_cast<int>(std::floor(hi + 1e-9));
            int stride = std::max(1, (last - first + 1) / 8);
            for (int e = first; e <= last; e += stride) out.push_back(std::pow(10.0, e));
            return out;
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            step = m * mag;
            if (step >= raw) break;
        }
        for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * step; t += step) out.push_back(t);
        return out;
    }
};

Axis fit_axis(bool log, const std::vector<double>& values) {
    Axis a;
    a.log = log;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!a.placeable(v)) continue;
        lo = std::min(lo, a.transform(v));
        hi = std::max(hi, a.transform(v));
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.04 * (hi - lo);
    a.lo = lo - pad;
    a.hi = hi + pad;
    return a;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& s : spec.series) {
        for (const auto& [x, y] : s.points) {
            xs.push_back(x);
            ys.push_back(y);
        }
    }
    const Axis ax = fit_axis(spec.log_x, xs);
    const Axis ay = fit_axis(spec.log_y, ys);
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (ax.transform(x) - ax.lo) / (ax.hi - ax.lo) * plot_w; };
    auto py = [&](double y) { return kTop + plot_h - (ay.transform(y) - ay.lo) / (ay.hi - ay.lo) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(spec.title) << "</text>\n";

    // grid and ticks
    for (double t : ax.ticks()) {
        const double x = px(t);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x) << "\" y2=\""
           << num(kTop + plot_h) << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 16) << "\" text-anchor=\"middle\">"
           << tick_label(t) << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = py(t);
        os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\""
           << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
           << tick_label(t) << "</text>\n";
    }
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w) << "\" height=\""
       << num(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 18)
       << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    os << "<text transform=\"translate(20 " << num(kTop + plot_h / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const std::string color = s.color.empty() ? kPalette[i % kPalette.size()] : s.color;
        std::ostringstream pts;
        bool any = false;
        for (const auto& [x, y] : s.points) {
            if (!ax.placeable(x) || !ay.placeable(y)) continue;
            pts << (any ? " " : "") << num(px(x)) << ',' << num(py(y));
            any = true;
        }
        if (any) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\"";
            if (s.dashed) os << " stroke-dasharray=\"6 4\"";
            os << " points=\"" << pts.str() << "\"/>\n";
        }
        if (s.markers) {
            for (const auto& [x, y] : s.points) {
                if (!ax.placeable(x) || !ay.placeable(y)) continue;
                os << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"1.6\" fill=\"" << color
                   << "\"/>\n";
            }
        }
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
        const double lx = kLeft + plot_w + 12.0;
        os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22) << "\" y2=\"" << num(ly)
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "")
           << "/>\n";
        os << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace cnpgap::io
