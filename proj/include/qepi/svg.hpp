// Dependency-free SVG chart emitters for the pipeline's figure outputs:
// a label-colored geographic scatter, multi-series line charts, and sorted
// bar charts. Output is deterministic for fixed input (fixed-precision
// coordinates, no timestamps), so figures diff cleanly in tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qepi/common.hpp"

namespace qepi {

namespace svg_detail {

inline const std::vector<std::string> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};

inline const std::string kNoiseColor = "#c0c0c0";

struct Frame {
    double width = 640, height = 480;
    double left = 60, right = 20, top = 40, bottom = 45;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

    double sx(double x) const {
        const double span = x_hi > x_lo ? x_hi - x_lo : 1.0;
        return left + (x - x_lo) / span * (width - left - right);
    }
    double sy(double y) const {
        const double span = y_hi > y_lo ? y_hi - y_lo : 1.0;
        return height - bottom - (y - y_lo) / span * (height - top - bottom);
    }
};

inline std::string num(double v) { return fmt_fixed(v, 2); }

inline std::string open_svg(const Frame& f, const std::string& title) {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width) + "\" height=\"" +
                      num(f.height) + "\" viewBox=\"0 0 " + num(f.width) + " " + num(f.height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(f.width / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">" + title + "</text>\n";
    out += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.width - f.left - f.right) +
           "\" height=\"" + num(f.height - f.top - f.bottom) + "\" fill=\"none\" stroke=\"#404040\"/>\n";
    return out;
}

inline std::string axis_labels(const Frame& f, const std::string& x_label, const std::string& y_label) {
    std::string out;
    out += "<text x=\"" + num((f.left + f.width - f.right) / 2) + "\" y=\"" + num(f.height - 10) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label + "</text>\n";
    out += "<text x=\"14\" y=\"" + num((f.top + f.height - f.bottom) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 " +
           num((f.top + f.height - f.bottom) / 2) + ")\">" + y_label + "</text>\n";
    // corner tick values
    out += "<text x=\"" + num(f.left) + "\" y=\"" + num(f.height - f.bottom + 14) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + num(f.x_lo) + "</text>\n";
    out += "<text x=\"" + num(f.width - f.right) + "\" y=\"" + num(f.height - f.bottom + 14) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + num(f.x_hi) + "</text>\n";
    out += "<text x=\"" + num(f.left - 6) + "\" y=\"" + num(f.height - f.bottom) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(f.y_lo) + "</text>\n";
    out += "<text x=\"" + num(f.left - 6) + "\" y=\"" + num(f.top + 10) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(f.y_hi) + "</text>\n";
    return out;
}

}  // namespace svg_detail

struct ScatterPoint {
    double x = 0.0;  // longitude
    double y = 0.0;  // latitude
    int label = -1;
};

// Geographic scatter, one dot per point, distinct color per cluster id,
// noise in gray.
inline std::string scatter_svg(const std::vector<ScatterPoint>& points, const std::string& title) {
    using namespace svg_detail;
    Frame f;
    if (!points.empty()) {
        f.x_lo = f.x_hi = points[0].x;
        f.y_lo = f.y_hi = points[0].y;
        for (const auto& p : points) {
            f.x_lo = std::min(f.x_lo, p.x);
            f.x_hi = std::max(f.x_hi, p.x);
            f.y_lo = std::min(f.y_lo, p.y);
            f.y_hi = std::max(f.y_hi, p.y);
        }
        const double pad_x = (f.x_hi - f.x_lo) * 0.05 + 1e-6;
        const double pad_y = (f.y_hi - f.y_lo) * 0.05 + 1e-6;
        f.x_lo -= pad_x;
        f.x_hi += pad_x;
        f.y_lo -= pad_y;
        f.y_hi += pad_y;
    }
    std::string out = open_svg(f, title);
    out += axis_labels(f, "longitude", "latitude");
    for (const auto& p : points) {
        const std::string& color =
            p.label < 0 ? kNoiseColor : kPalette[static_cast<std::size_t>(p.label) % kPalette.size()];
        out += "<circle cx=\"" + num(f.sx(p.x)) + "\" cy=\"" + num(f.sy(p.y)) + "\" r=\"4\" fill=\"" + color +
               "\" fill-opacity=\"0.8\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

struct LineSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // already in x order
};

inline std::string line_chart_svg(const std::vector<LineSeries>& series, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
    using namespace svg_detail;
    Frame f;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (first) {
                f.x_lo = f.x_hi = x;
                f.y_lo = f.y_hi = y;
                first = false;
            }
            f.x_lo = std::min(f.x_lo, x);
            f.x_hi = std::max(f.x_hi, x);
            f.y_lo = std::min(f.y_lo, y);
            f.y_hi = std::max(f.y_hi, y);
        }
    }
    f.y_lo = std::min(f.y_lo, 0.0);
    f.y_hi += (f.y_hi - f.y_lo) * 0.1 + 1e-9;
    std::string out = open_svg(f, title);
    out += axis_labels(f, x_label, y_label);
    for (std::size_t s = 0; s < series.size(); ++s) {
        const std::string& color = kPalette[s % kPalette.size()];
        std::string pts;
        for (const auto& [x, y] : series[s].points) {
            if (!pts.empty()) pts += " ";
            pts += num(f.sx(x)) + "," + num(f.sy(y));
        }
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        for (const auto& [x, y] : series[s].points)
            out += "<circle cx=\"" + num(f.sx(x)) + "\" cy=\"" + num(f.sy(y)) + "\" r=\"3\" fill=\"" + color +
                   "\"/>\n";
        // legend entry
        const double ly = f.top + 16.0 + 16.0 * static_cast<double>(s);
        out += "<rect x=\"" + num(f.width - f.right - 150) + "\" y=\"" + num(ly - 9) +
               "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + num(f.width - f.right - 135) + "\" y=\"" + num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + series[s].name + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

struct BarItem {
    std::string name;
    double value = 0.0;
};

// Vertical bars in the order given (callers sort), values printed above.
inline std::string bar_chart_svg(const std::vector<BarItem>& items, const std::string& title,
                                 const std::string& y_label) {
    using namespace svg_detail;
    Frame f;
    f.x_lo = 0;
    f.x_hi = 1;
    f.y_lo = 0;
    f.y_hi = 1e-9;
    for (const auto& item : items) f.y_hi = std::max(f.y_hi, item.value);
    f.y_hi *= 1.15;
    std::string out = open_svg(f, title);
    out += axis_labels(f, "", y_label);
    const double plot_w = f.width - f.left - f.right;
    const double slot = items.empty() ? plot_w : plot_w / static_cast<double>(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double x0 = f.left + slot * (static_cast<double>(i) + 0.15);
        const double w = slot * 0.7;
        const double y0 = f.sy(items[i].value);
        const std::string& color = kPalette[i % kPalette.size()];
        out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(w) + "\" height=\"" +
               num(f.sy(0.0) - y0) + "\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + num(x0 + w / 2) + "\" y=\"" + num(y0 - 4) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt_fixed(items[i].value, 3) +
               "</text>\n";
        out += "<text x=\"" + num(x0 + w / 2) + "\" y=\"" + num(f.height - f.bottom + 14) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + items[i].name + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace qepi
