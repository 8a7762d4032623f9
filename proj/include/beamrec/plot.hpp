// SPDX-License-Identifier: Apache-2.0
//
// beamrec - position-aided mmWave beam recommendation by smooth tensor completion
// Copyright (C) 2026 The beamrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BEAMREC_PLOT_HPP
#define BEAMREC_PLOT_HPP

#include "detail/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamrec
{

struct PlotSeries
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec
{
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

namespace detail
{

inline std::string escape_xml(const std::string &s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

// Round tick step (1, 2 or 5 times a power of ten) giving roughly `target` intervals.
inline double nice_step(double span, int target)
{
    const double raw = span / std::max(target, 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag)
            return m * mag;
    return 10.0 * mag;
}

} // namespace detail

/// Minimal SVG line chart: axes, ticks, one polyline with markers per series, legend.
inline void write_line_chart(const std::string &path, const PlotSpec &spec)
{
    constexpr double width = 720, height = 480, left = 80, right = 220, top = 50, bottom = 60;
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto &s : spec.series)
        for (std::size_t k = 0; k < s.x.size(); ++k)
        {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]))
                continue;
            x_min = std::min(x_min, s.x[k]);
            x_max = std::max(x_max, s.x[k]);
            y_min = std::min(y_min, s.y[k]);
            y_max = std::max(y_max, s.y[k]);
        }
    if (!std::isfinite(x_min))
    {
        x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    }
    if (x_max == x_min)
        x_max = x_min + 1.0;
    if (y_max == y_min)
        y_max = y_min + 1.0;
    const double y_step = detail::nice_step(y_max - y_min, 6);
    y_min = std::floor(y_min / y_step) * y_step;
    y_max = std::ceil(y_max / y_step) * y_step;
    const double x_step = detail::nice_step(x_max - x_min, 8);

    const double pw = width - left - right, ph = height - top - bottom;
    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
    auto sy = [&](double y) { return top + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };
    auto num = [](double v) { return detail::to_text_fixed(v, 2); };

    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_line_chart: cannot open " + path);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">"
       << detail::escape_xml(spec.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double y = y_min; y <= y_max + 1e-9 * y_step; y += y_step)
        os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << num(sy(y)) << "\" y2=\"" << num(sy(y))
           << "\" stroke=\"#ddd\"/>\n<text x=\"" << left - 6 << "\" y=\"" << num(sy(y) + 4)
           << "\" text-anchor=\"end\">" << detail::to_text(std::round(y / y_step) * y_step) << "</text>\n";
    for (double x = std::ceil(x_min / x_step) * x_step; x <= x_max + 1e-9 * x_step; x += x_step)
        os << "<line x1=\"" << num(sx(x)) << "\" x2=\"" << num(sx(x)) << "\" y1=\"" << top << "\" y2=\"" << top + ph
           << "\" stroke=\"#ddd\"/>\n<text x=\"" << num(sx(x)) << "\" y=\"" << top + ph + 18
           << "\" text-anchor=\"middle\">" << detail::to_text(std::round(x / x_step) * x_step) << "</text>\n";
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
       << detail::escape_xml(spec.x_label) << "</text>\n";
    os << "<text transform=\"translate(20," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::escape_xml(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < spec.series.size(); ++k)
    {
        const auto &s = spec.series[k];
        const char *color = colors[k % std::size(colors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t p = 0; p < s.x.size(); ++p)
            os << num(sx(s.x[p])) << ',' << num(sy(s.y[p])) << (p + 1 < s.x.size() ? " " : "");
        os << "\"/>\n";
        for (std::size_t p = 0; p < s.x.size(); ++p)
            os << "<circle cx=\"" << num(sx(s.x[p])) << "\" cy=\"" << num(sy(s.y[p])) << "\" r=\"3\" fill=\"" << color
               << "\"/>\n";
        const double ly = top + 10 + 20.0 * static_cast<double>(k);
        os << "<line x1=\"" << left + pw + 15 << "\" x2=\"" << left + pw + 40 << "\" y1=\"" << num(ly) << "\" y2=\""
           << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n<text x=\"" << left + pw + 46
           << "\" y=\"" << num(ly + 4) << "\">" << detail::escape_xml(s.label) << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace beamrec

#endif
