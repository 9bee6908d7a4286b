#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "vistaloop/common.hpp"
#include "vistaloop/geometry.hpp"
#include "vistaloop/vocab.hpp"

namespace vistaloop {

enum class PartShape : uint8_t { Box, Cylinder, Capsule };

// One convex piece of a category silhouette. Vertices live in the unit box
// [-0.5, 0.5]^3 (x forward, y left, z up) and are scaled by the object size.
struct AssemblyPart {
    PartShape shape = PartShape::Box;
    std::vector<Vec3> vertices;
    double shade = 1.0;  // multiplier on the object base color
};

namespace detail {

inline AssemblyPart unit_box_part(double x0, double x1, double y0, double y1, double z0, double z1,
                                  double shade, PartShape shape = PartShape::Box) {
    AssemblyPart p;
    p.shape = shape;
    p.shade = shade;
    for (double x : {x0, x1})
        for (double y : {y0, y1})
            for (double z : {z0, z1}) p.vertices.push_back({x, y, z});
    return p;
}

// Octagonal prism around a straight axis; stands in for cylinders/capsules.
inline AssemblyPart prism_part(Vec3 a, Vec3 b, double radius, double shade, PartShape shape) {
    AssemblyPart p;
    p.shape = shape;
    p.shade = shade;
    Vec3 axis = b - a;
    const double len = axis.norm();
    axis = axis * (1.0 / len);
    Vec3 ref = std::abs(axis.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    Vec3 u = cross(axis, ref);
    u = u * (1.0 / u.norm());
    const Vec3 v = cross(axis, u);
    for (int k = 0; k < 8; ++k) {
        const double ang = 2.0 * kPi * k / 8.0;
        const Vec3 r = u * (radius * std::cos(ang)) + v * (radius * std::sin(ang));
        p.vertices.push_back(a + r);
        p.vertices.push_back(b + r);
    }
    return p;
}

}  // namespace detail

// Category silhouettes. Only the outline matters to the downstream metrics,
// so each is a handful of convex parts kept strictly inside the unit box.
inline std::vector<AssemblyPart> category_assembly(std::string_view category,
                                                   const std::vector<std::string>& styles) {
    using detail::prism_part;
    using detail::unit_box_part;
    const bool boxy =
        std::find(styles.begin(), styles.end(), "boxy") != styles.end();

    std::vector<AssemblyPart> parts;
    if (category == "car") {
        parts.push_back(unit_box_part(-0.5, 0.5, -0.5, 0.5, -0.5, 0.1, 1.0));
        if (!boxy) parts.push_back(unit_box_part(-0.40, 0.10, -0.42, 0.42, 0.1, 0.5, 0.78));
    } else if (category == "bus") {
        parts.push_back(unit_box_part(-0.5, 0.5, -0.5, 0.5, -0.5, 0.5, 1.0));
        parts.push_back(unit_box_part(0.30, 0.5, -0.45, 0.45, 0.0, 0.45, 0.80));
    } else if (category == "truck") {
        parts.push_back(unit_box_part(-0.5, 0.15, -0.5, 0.5, -0.5, 0.5, 1.0));
        parts.push_back(unit_box_part(0.15, 0.5, -0.5, 0.5, -0.5, 0.15, 0.88));
    } else if (category == "construction_vehicle") {
        parts.push_back(unit_box_part(-0.5, 0.5, -0.5, 0.5, -0.5, 0.05, 1.0));
        parts.push_back(prism_part({-0.10, 0.0, -0.05}, {0.40, 0.0, 0.42}, 0.07, 0.90,
                                   PartShape::Cylinder));
    } else if (category == "pedestrian") {
        parts.push_back(prism_part({0.0, 0.0, -0.5}, {0.0, 0.0, 0.30}, 0.42, 1.0, PartShape::Capsule));
        parts.push_back(prism_part({0.0, 0.0, 0.30}, {0.0, 0.0, 0.50}, 0.26, 0.95, PartShape::Capsule));
    } else if (category == "trailer") {
        parts.push_back(unit_box_part(-0.5, 0.5, -0.5, 0.5, -0.5, 0.5, 1.0));
        if (!boxy) parts.push_back(unit_box_part(-0.5, -0.35, -0.4, 0.4, -0.5, -0.1, 0.85));
    } else {
        throw VocabError("unknown category token '" + std::string(category) + "'");
    }
    return parts;
}

// Instantiates the assembly at a world pose: scale by box size, rotate by
// yaw, translate to center.
inline std::vector<std::vector<Vec3>> assembly_world_vertices(
    const std::vector<AssemblyPart>& parts, const BoxPose3D& box) {
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    std::vector<std::vector<Vec3>> out;
    out.reserve(parts.size());
    for (const auto& part : parts) {
        std::vector<Vec3> verts;
        verts.reserve(part.vertices.size());
        for (const auto& lv : part.vertices) {
            const double lx = lv.x * box.size.x, ly = lv.y * box.size.y, lz = lv.z * box.size.z;
            verts.push_back({box.center.x + c * lx - s * ly, box.center.y + s * lx + c * ly,
                             box.center.z + lz});
        }
        out.push_back(std::move(verts));
    }
    return out;
}

}  // namespace vistaloop
