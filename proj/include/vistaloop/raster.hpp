#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "vistaloop/common.hpp"
#include "vistaloop/projection.hpp"

namespace vistaloop {

// A pixel belongs to a polygon iff its center (x+0.5, y+0.5) lies inside.
// The small epsilon keeps shared-edge pixels stable across equivalent hulls.
inline bool point_in_convex(const std::vector<Vec2>& hull, double px, double py) {
    const size_t n = hull.size();
    if (n == 0) return false;
    if (n == 1) return std::abs(hull[0].x - px) < 0.5 && std::abs(hull[0].y - py) < 0.5;
    if (n == 2) return false;  // degenerate segment covers no pixel centers
    double sign = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = hull[i];
        const Vec2& b = hull[(i + 1) % n];
        const double c = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
        if (std::abs(c) <= 1e-9) continue;
        if (sign == 0.0)
            sign = c > 0 ? 1.0 : -1.0;
        else if ((c > 0 ? 1.0 : -1.0) != sign)
            return false;
    }
    return true;
}

// Invokes fn(x, y) for every covered pixel inside [0,width) x [0,height).
inline void fill_convex(const ScreenPolygon& poly, int width, int height,
                        const std::function<void(int, int)>& fn) {
    if (poly.hull.empty()) return;
    const int x0 = std::max(0, static_cast<int>(std::floor(poly.u_min)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(poly.u_max)));
    const int y0 = std::max(0, static_cast<int>(std::floor(poly.v_min)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(poly.v_max)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (point_in_convex(poly.hull, x + 0.5, y + 0.5)) fn(x, y);
}

// Thick 2D segment: pixels whose centers are within half_width of the segment.
inline void fill_segment(Vec2 a, Vec2 b, double half_width, int width, int height,
                         const std::function<void(int, int)>& fn) {
    const double x0 = std::min(a.x, b.x) - half_width, x1 = std::max(a.x, b.x) + half_width;
    const double y0 = std::min(a.y, b.y) - half_width, y1 = std::max(a.y, b.y) + half_width;
    const int px0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int px1 = std::min(width - 1, static_cast<int>(std::ceil(x1)));
    const int py0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int py1 = std::min(height - 1, static_cast<int>(std::ceil(y1)));
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    for (int y = py0; y <= py1; ++y) {
        for (int x = px0; x <= px1; ++x) {
            const double cx = x + 0.5, cy = y + 0.5;
            double t = len2 > 0 ? ((cx - a.x) * dx + (cy - a.y) * dy) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double qx = a.x + t * dx - cx, qy = a.y + t * dy - cy;
            if (qx * qx + qy * qy <= half_width * half_width) fn(x, y);
        }
    }
}

}  // namespace vistaloop
