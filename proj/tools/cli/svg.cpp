// Copyright 2026 The ITCG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace itcg::cli {

namespace {

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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

// Round step for about n ticks over span.
double tick_step(double span, int n) {
    const double raw = span / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    return mag * (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0);
}

}  // namespace

std::string render_svg(const Plot& p, int width, int height) {
    const double left = 70, right = 20, top = 40, bottom = 55;
    const double pw = width - left - right, ph = height - top - bottom;

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : p.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const double ypad = 0.05 * (y1 - y0);
    y0 -= ypad;
    y1 += ypad;
    if (p.equal_aspect) {
        const double sx = (x1 - x0) / pw, sy = (y1 - y0) / ph;
        if (sx > sy) {
            const double c = 0.5 * (y0 + y1), h = 0.5 * sx * ph;
            y0 = c - h, y1 = c + h;
        } else {
            const double c = 0.5 * (x0 + x1), h = 0.5 * sy * pw;
            x0 = c - h, x1 = c + h;
        }
    }
    auto X = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto Y = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<text x=\"" + fmt(width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(p.title) +
         "</text>\n";
    o += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

    const double dx = tick_step(x1 - x0, 6), dy = tick_step(y1 - y0, 6);
    for (double t = std::ceil(x0 / dx) * dx; t <= x1 + 1e-9 * dx; t += dx) {
        const double v = std::abs(t) < 1e-9 * dx ? 0.0 : t;
        o += "<line x1=\"" + fmt(X(v)) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(X(v)) + "\" y2=\"" + fmt(top + ph) +
             "\" stroke=\"#e0e0e0\"/>\n";
        o += "<text x=\"" + fmt(X(v)) + "\" y=\"" + fmt(top + ph + 16) + "\" text-anchor=\"middle\">" + fmt(v, "%g") +
             "</text>\n";
    }
    for (double t = std::ceil(y0 / dy) * dy; t <= y1 + 1e-9 * dy; t += dy) {
        const double v = std::abs(t) < 1e-9 * dy ? 0.0 : t;
        o += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(Y(v)) + "\" x2=\"" + fmt(left + pw) + "\" y2=\"" + fmt(Y(v)) +
             "\" stroke=\"#e0e0e0\"/>\n";
        o += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(Y(v) + 4) + "\" text-anchor=\"end\">" + fmt(v, "%g") +
             "</text>\n";
    }
    o += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(height - 12.0) + "\" text-anchor=\"middle\">" +
         escape(p.x_label) + "</text>\n";
    o += "<text transform=\"translate(16," + fmt(top + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(p.y_label) + "</text>\n";

    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& s = p.series[k];
        const char* color = kColors[k % std::size(kColors)];
        o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\"";
        if (s.dashed) o += " stroke-dasharray=\"6,4\"";
        o += " points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            o += fmt(X(s.x[i])) + "," + fmt(Y(s.y[i])) + " ";
        }
        o += "\"/>\n";
        const double ly = top + 14 + 16.0 * static_cast<double>(k);
        o += "<line x1=\"" + fmt(left + pw - 150) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" + fmt(left + pw - 126) +
             "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
             (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
        o += "<text x=\"" + fmt(left + pw - 120) + "\" y=\"" + fmt(ly) + "\">" + escape(s.name) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

}  // namespace itcg::cli
