// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file svg.hpp
 * @brief Static SVG 1.1 polyline plots of trajectories.
 */

#pragma once

#include <pilotwave/integrator.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace pilotwave::experiments {

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                     "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

struct Frame {
    double x0, x1, y0, y1;  // data range
    double w = 640, h = 420, left = 70, right = 20, top = 40, bottom = 50;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
    double py(double y) const { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); }
};

inline void pad_range(double& lo, double& hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
}

inline void axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xlabel,
                 const std::string& ylabel) {
    os << "<rect x=\"0\" y=\"0\" width=\"" << fmt(f.w) << "\" height=\"" << fmt(f.h) << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(f.w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    const double bx = f.left, by = f.h - f.bottom, tx = f.w - f.right, ty = f.top;
    os << "<polyline fill=\"none\" stroke=\"black\" points=\"" << fmt(bx) << "," << fmt(ty) << " " << fmt(bx) << ","
       << fmt(by) << " " << fmt(tx) << "," << fmt(by) << "\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
        os << "<line x1=\"" << fmt(f.px(xv)) << "\" y1=\"" << fmt(by) << "\" x2=\"" << fmt(f.px(xv)) << "\" y2=\""
           << fmt(by + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(by + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
           << fmt(xv) << "</text>\n";
        os << "<line x1=\"" << fmt(bx - 5) << "\" y1=\"" << fmt(f.py(yv)) << "\" x2=\"" << fmt(bx) << "\" y2=\""
           << fmt(f.py(yv)) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt(bx - 8) << "\" y=\"" << fmt(f.py(yv) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
           << fmt(yv) << "</text>\n";
    }
    os << "<text x=\"" << fmt((bx + tx) / 2) << "\" y=\"" << fmt(f.h - 12) << "\" text-anchor=\"middle\" font-size=\"13\">"
       << xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << fmt((by + ty) / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
       << fmt((by + ty) / 2) << ")\">" << ylabel << "</text>\n";
}

inline std::string open_svg(const Frame& f) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           fmt(f.w) + "\" height=\"" + fmt(f.h) + "\" viewBox=\"0 0 " + fmt(f.w) + " " + fmt(f.h) + "\">\n";
}

}  // namespace detail

/// Coordinate against time, one polyline per particle and axis.
inline std::string svg_time_plot(const Trajectory& traj, const std::string& title) {
    using namespace detail;
    if (traj.samples.empty()) throw ParameterError("svg: empty trajectory");
    Frame f{traj.samples.front().t, traj.samples.back().t, std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
    if (f.x0 > f.x1) std::swap(f.x0, f.x1);
    for (const auto& s : traj.samples) {
        for (double c : s.x.coords()) {
            f.y0 = std::min(f.y0, c);
            f.y1 = std::max(f.y1, c);
        }
    }
    if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1.0;
    pad_range(f.y0, f.y1);
    std::ostringstream os;
    os << open_svg(f);
    axes(os, f, title, "t", "coordinate");
    static const char* axis_names[] = {"x", "y", "z"};
    std::size_t line = 0;
    for (std::size_t k = 0; k < traj.particles; ++k) {
        for (std::size_t a = 0; a < traj.dim; ++a, ++line) {
            const char* colour = kPalette[k % kPalette.size()];
            os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"";
            if (a > 0) os << " stroke-dasharray=\"" << (a == 1 ? "6,3" : "2,2") << "\"";
            os << " points=\"";
            for (std::size_t i = 0; i < traj.samples.size(); ++i) {
                const auto& s = traj.samples[i];
                os << (i ? " " : "") << fmt(f.px(s.t)) << "," << fmt(f.py(s.x(k, a)));
            }
            os << "\"/>\n";
            os << "<text x=\"" << fmt(f.w - f.right - 4) << "\" y=\"" << fmt(f.top + 14 * (line + 1))
               << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colour << "\">particle " << k << " "
               << axis_names[a] << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

/// Planar paths (d = 2), one polyline per particle, start marked by a dot.
inline std::string svg_plan_view(const Trajectory& traj, const std::string& title) {
    using namespace detail;
    if (traj.dim != 2) throw ParameterError("svg plan view: needs d = 2");
    if (traj.samples.empty()) throw ParameterError("svg: empty trajectory");
    const double inf = std::numeric_limits<double>::infinity();
    Frame f{inf, -inf, inf, -inf};
    for (const auto& s : traj.samples) {
        for (std::size_t k = 0; k < traj.particles; ++k) {
            f.x0 = std::min(f.x0, s.x(k, 0));
            f.x1 = std::max(f.x1, s.x(k, 0));
            f.y0 = std::min(f.y0, s.x(k, 1));
            f.y1 = std::max(f.y1, s.x(k, 1));
        }
    }
    pad_range(f.x0, f.x1);
    pad_range(f.y0, f.y1);
    std::ostringstream os;
    os << open_svg(f);
    axes(os, f, title, "x", "y");
    for (std::size_t k = 0; k < traj.particles; ++k) {
        const char* colour = kPalette[k % kPalette.size()];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < traj.samples.size(); ++i) {
            const auto& s = traj.samples[i];
            os << (i ? " " : "") << fmt(f.px(s.x(k, 0))) << "," << fmt(f.py(s.x(k, 1)));
        }
        os << "\"/>\n";
        const auto& s0 = traj.samples.front();
        os << "<circle cx=\"" << fmt(f.px(s0.x(k, 0))) << "\" cy=\"" << fmt(f.py(s0.x(k, 1))) << "\" r=\"3\" fill=\""
           << colour << "\"/>\n";
        os << "<text x=\"" << fmt(f.w - f.right - 4) << "\" y=\"" << fmt(f.top + 14 * (k + 1))
           << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << colour << "\">particle " << k << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace pilotwave::experiments
