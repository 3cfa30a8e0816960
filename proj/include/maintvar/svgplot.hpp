#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "maintvar/csv.hpp"
#include "maintvar/date.hpp"
#include "maintvar/errors.hpp"

namespace maintvar {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

/// 1-2-5 tick spacing covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
    std::vector<double> ticks;
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    double step = 10.0 * mag;
    if (norm <= 1.0) step = mag;
    else if (norm <= 2.0) step = 2.0 * mag;
    else if (norm <= 5.0) step = 5.0 * mag;
    for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
        ticks.push_back(t == 0.0 ? 0.0 : t);  // normalize -0
    return ticks;
}

}  // namespace detail

/// Self-contained SVG line chart of an actual-vs-forecast pair. Pure
/// function of its inputs: identical series give byte-identical output.
inline std::string render_forecast_svg(std::span<const Date> dates,
                                       std::span<const double> actual,
                                       std::span<const double> forecast,
                                       const std::string& title) {
    if (dates.empty()) throw EmptySeries();
    if (actual.size() != dates.size()) throw LengthMismatch(actual.size(), dates.size());
    if (forecast.size() != dates.size()) throw LengthMismatch(forecast.size(), dates.size());

    constexpr double kWidth = 860, kHeight = 520;
    constexpr double kLeft = 80, kRight = 30, kTop = 42, kBottom = 64;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    double lo = actual[0], hi = actual[0];
    for (double v : actual) lo = std::min(lo, v), hi = std::max(hi, v);
    for (double v : forecast) lo = std::min(lo, v), hi = std::max(hi, v);
    if (lo == hi) lo -= 1.0, hi += 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double x0 = dates.front().serial;
    const double x1 = dates.back().serial;
    const double xspan = x1 > x0 ? x1 - x0 : 1.0;
    auto px = [&](double serial) { return kLeft + (serial - x0) / xspan * plot_w; };
    auto py = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"520\" "
           "viewBox=\"0 0 860 520\">\n";
    svg += "<rect width=\"860\" height=\"520\" fill=\"white\"/>\n";
    svg += "<text x=\"430\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + title + "</text>\n";

    // Axes.
    svg += "<line x1=\"" + detail::svg_num(kLeft) + "\" y1=\"" + detail::svg_num(kTop) +
           "\" x2=\"" + detail::svg_num(kLeft) + "\" y2=\"" + detail::svg_num(kTop + plot_h) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + detail::svg_num(kLeft) + "\" y1=\"" + detail::svg_num(kTop + plot_h) +
           "\" x2=\"" + detail::svg_num(kLeft + plot_w) + "\" y2=\"" +
           detail::svg_num(kTop + plot_h) + "\" stroke=\"black\"/>\n";

    for (double t : detail::nice_ticks(lo, hi)) {
        const double y = py(t);
        svg += "<line x1=\"" + detail::svg_num(kLeft - 4) + "\" y1=\"" + detail::svg_num(y) +
               "\" x2=\"" + detail::svg_num(kLeft) + "\" y2=\"" + detail::svg_num(y) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(kLeft - 8) + "\" y=\"" + detail::svg_num(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               format_double(t) + "</text>\n";
    }

    const std::size_t n = dates.size();
    const std::size_t n_xticks = std::min<std::size_t>(6, n);
    for (std::size_t i = 0; i < n_xticks; ++i) {
        const std::size_t idx = n_xticks == 1 ? 0 : i * (n - 1) / (n_xticks - 1);
        const double x = px(dates[idx].serial);
        svg += "<line x1=\"" + detail::svg_num(x) + "\" y1=\"" + detail::svg_num(kTop + plot_h) +
               "\" x2=\"" + detail::svg_num(x) + "\" y2=\"" +
               detail::svg_num(kTop + plot_h + 4) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::svg_num(x) + "\" y=\"" + detail::svg_num(kTop + plot_h + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               dates[idx].to_string() + "</text>\n";
    }

    svg += "<text x=\"" + detail::svg_num(kLeft + plot_w / 2) + "\" y=\"" +
           detail::svg_num(kHeight - 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">date</text>\n";
    svg += "<text x=\"20\" y=\"" + detail::svg_num(kTop + plot_h / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " + detail::svg_num(kTop + plot_h / 2) +
           ")\">total generation (kWh)</text>\n";

    auto polyline = [&](std::span<const double> series, const char* color) {
        std::string pts;
        for (std::size_t i = 0; i < n; ++i) {
            if (i) pts += ' ';
            pts += detail::svg_num(px(dates[i].serial)) + ',' + detail::svg_num(py(series[i]));
        }
        return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
    };
    svg += polyline(actual, "#1f77b4");
    svg += polyline(forecast, "#d62728");

    // Legend.
    const double lx = kLeft + plot_w - 150, ly = kTop + 10;
    svg += "<line x1=\"" + detail::svg_num(lx) + "\" y1=\"" + detail::svg_num(ly) + "\" x2=\"" +
           detail::svg_num(lx + 28) + "\" y2=\"" + detail::svg_num(ly) +
           "\" stroke=\"#1f77b4\" stroke-width=\"1.8\"/>\n";
    svg += "<text x=\"" + detail::svg_num(lx + 34) + "\" y=\"" + detail::svg_num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">actual</text>\n";
    svg += "<line x1=\"" + detail::svg_num(lx) + "\" y1=\"" + detail::svg_num(ly + 18) +
           "\" x2=\"" + detail::svg_num(lx + 28) + "\" y2=\"" + detail::svg_num(ly + 18) +
           "\" stroke=\"#d62728\" stroke-width=\"1.8\"/>\n";
    svg += "<text x=\"" + detail::svg_num(lx + 34) + "\" y=\"" + detail::svg_num(ly + 22) +
           "\" font-family=\"sans-serif\" font-size=\"12\">forecast</text>\n";

    svg += "</svg>\n";
    return svg;
}

}  // namespace maintvar
