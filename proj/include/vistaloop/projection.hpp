#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "vistaloop/common.hpp"
#include "vistaloop/geometry.hpp"

namespace vistaloop {

// Convex hull of projected geometry plus its axis-aligned bounding rectangle,
// in continuous pixel coordinates.
struct ScreenPolygon {
    std::vector<Vec2> hull;  // convex, counterclockwise in (u, v) axes
    double u_min = 0.0, v_min = 0.0, u_max = 0.0, v_max = 0.0;
};

// Andrew monotone chain. Returns a counterclockwise hull; collinear inputs
// degrade to a segment or point.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;
    auto cross2 = [](const Vec2& o, const Vec2& a, const Vec2& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Vec2> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const size_t lower = k + 1;
    for (size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

inline ScreenPolygon make_screen_polygon(std::vector<Vec2> projected) {
    ScreenPolygon out;
    out.hull = convex_hull(std::move(projected));
    out.u_min = out.v_min = 1e300;
    out.u_max = out.v_max = -1e300;
    for (const auto& p : out.hull) {
        out.u_min = std::min(out.u_min, p.x);
        out.u_max = std::max(out.u_max, p.x);
        out.v_min = std::min(out.v_min, p.y);
        out.v_max = std::max(out.v_max, p.y);
    }
    return out;
}

inline Vec2 project_camera_point(const Camera& cam, const Vec3& pc) {
    return {cam.fx * pc.x / pc.z + cam.cx, cam.fy * pc.y / pc.z + cam.cy};
}

// Projects an arbitrary convex vertex set given in world coordinates.
// Vertices behind the near plane are handled by clipping every edge of the
// set's convex hull in 3D; for our primitives it is enough to clip the edges
// of the vertex list pairwise (all parts are small and convex).
inline std::optional<ScreenPolygon> project_convex_points(
    const std::vector<Vec3>& world, const std::vector<std::pair<int, int>>& edges,
    const Camera& cam) {
    std::vector<Vec3> cam_pts;
    cam_pts.reserve(world.size());
    bool any_front = false;
    for (const auto& w : world) {
        cam_pts.push_back(cam.to_camera(w));
        any_front = any_front || cam_pts.back().z > cam.near_plane;
    }
    if (!any_front) return std::nullopt;

    std::vector<Vec2> pts;
    for (const auto& p : cam_pts)
        if (p.z > cam.near_plane) pts.push_back(project_camera_point(cam, p));
    for (const auto& [i, j] : edges) {
        const Vec3& a = cam_pts[static_cast<size_t>(i)];
        const Vec3& b = cam_pts[static_cast<size_t>(j)];
        const bool fa = a.z > cam.near_plane, fb = b.z > cam.near_plane;
        if (fa == fb) continue;
        const double t = (cam.near_plane - a.z) / (b.z - a.z);
        const Vec3 x{a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, cam.near_plane};
        pts.push_back(project_camera_point(cam, x));
    }
    if (pts.empty()) return std::nullopt;
    return make_screen_polygon(std::move(pts));
}

inline std::vector<std::pair<int, int>> box_edges() {
    // Corner index bit layout: 4*ix + 2*iy + iz (see BoxPose3D::corners).
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < 8; ++i)
        for (int bit : {1, 2, 4}) {
            const int j = i ^ bit;
            if (j > i) e.emplace_back(i, j);
        }
    return e;
}

// Projects a 3D box onto the image plane. Absent when every corner lies at or
// behind the near plane; otherwise near-plane clipped, pinhole projected, and
// summarized as hull + bounding rectangle.
inline std::optional<ScreenPolygon> project_box(const BoxPose3D& box, const Camera& cam) {
    const auto corners = box.corners();
    static const std::vector<std::pair<int, int>> edges = box_edges();
    return project_convex_points(std::vector<Vec3>(corners.begin(), corners.end()), edges, cam);
}

// Edge list for an arbitrary convex vertex cloud: all pairs. Quadratic but
// our parts have at most 16 vertices.
inline std::vector<std::pair<int, int>> complete_edges(size_t n) {
    std::vector<std::pair<int, int>> e;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) e.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return e;
}

}  // namespace vistaloop
