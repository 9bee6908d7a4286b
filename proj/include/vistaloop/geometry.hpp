#pragma once

#include <array>
#include <cmath>
#include <string>

#include "vistaloop/common.hpp"

namespace vistaloop {

// World frame: x forward, y left, z up, meters. Ground plane is z = 0.
// Camera frame: x right, y down, z forward (pinhole looks along +z).

// Oriented 3D box; yaw is rotation about world z, stored wrapped to [-pi, pi).
struct BoxPose3D {
    Vec3 center;
    Vec3 size;  // length (along local x), width, height
    double yaw = 0.0;

    static BoxPose3D make(Vec3 center, Vec3 size, double yaw) {
        BoxPose3D b{center, size, wrap_angle(yaw)};
        b.check();
        return b;
    }

    void check() const {
        if (!(size.x > 0.0 && size.y > 0.0 && size.z > 0.0))
            throw ValidationError("box size components must be strictly positive");
        if (!(yaw >= -kPi && yaw < kPi)) throw ValidationError("box yaw not normalized to [-pi, pi)");
    }

    // Corners in world coordinates; order is fixed (sign pattern of
    // (+-l/2, +-w/2, +-h/2) enumerated x-major).
    std::array<Vec3, 8> corners() const {
        std::array<Vec3, 8> out;
        const double c = std::cos(yaw), s = std::sin(yaw);
        int i = 0;
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                for (int sz : {-1, 1}) {
                    const double lx = 0.5 * size.x * sx;
                    const double ly = 0.5 * size.y * sy;
                    const double lz = 0.5 * size.z * sz;
                    out[static_cast<size_t>(i++)] = {center.x + c * lx - s * ly,
                                                     center.y + s * lx + c * ly,
                                                     center.z + lz};
                }
        return out;
    }
};

// Linear interpolation of center and size, shortest arc for yaw.
inline BoxPose3D interpolate_box(const BoxPose3D& a, const BoxPose3D& b, double t) {
    BoxPose3D out;
    out.center = {lerp(a.center.x, b.center.x, t), lerp(a.center.y, b.center.y, t),
                  lerp(a.center.z, b.center.z, t)};
    out.size = {lerp(a.size.x, b.size.x, t), lerp(a.size.y, b.size.y, t), lerp(a.size.z, b.size.z, t)};
    out.yaw = lerp_angle(a.yaw, b.yaw, t);
    return out;
}

struct EgoPose {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
};

struct Camera {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    Mat3 rotation;     // world -> camera
    Vec3 translation;  // X_cam = R * X_world + t
    double near_plane = 0.1;

    Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }

    // Validity per the rig contract. Tolerance on orthonormality is 1e-9.
    void check() const {
        if (!(fx > 0.0 && fy > 0.0)) throw ValidationError("camera focal lengths must be positive");
        if (width <= 0 || height <= 0) throw ValidationError("camera image size must be positive");
        if (!(cx >= 0.0 && cx < width)) throw ValidationError("camera cx out of image range");
        if (!(cy >= 0.0 && cy < height)) throw ValidationError("camera cy out of image range");
        if (!(near_plane > 0.0)) throw ValidationError("camera near plane must be positive");

        const Mat3 rt = rotation.transposed();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double dot = 0.0;
                for (int k = 0; k < 3; ++k) dot += rotation(r, k) * rt(c, k);
                const double expect = (r == c) ? 1.0 : 0.0;
                if (std::abs(dot - expect) > 1e-9)
                    throw ValidationError("camera rotation is not orthonormal");
            }
        const double det =
            rotation(0, 0) * (rotation(1, 1) * rotation(2, 2) - rotation(1, 2) * rotation(2, 1)) -
            rotation(0, 1) * (rotation(1, 0) * rotation(2, 2) - rotation(1, 2) * rotation(2, 0)) +
            rotation(0, 2) * (rotation(1, 0) * rotation(2, 1) - rotation(1, 1) * rotation(2, 0));
        if (std::abs(det - 1.0) > 1e-9) throw ValidationError("camera rotation determinant is not +1");
    }
};

// Convenience rig builder: camera at `position` with heading `yaw_rad`
// (world z up), zero pitch/roll.
inline Camera make_camera_yaw(double yaw_rad, Vec3 position, double fx, double fy, double cx,
                              double cy, int width, int height, double near_plane = 0.5) {
    const double c = std::cos(yaw_rad), s = std::sin(yaw_rad);
    const Vec3 fwd{c, s, 0.0};
    const Vec3 right{s, -c, 0.0};
    const Vec3 down{0.0, 0.0, -1.0};
    Camera cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = cx;
    cam.cy = cy;
    cam.width = width;
    cam.height = height;
    cam.near_plane = near_plane;
    cam.rotation(0, 0) = right.x;
    cam.rotation(0, 1) = right.y;
    cam.rotation(0, 2) = right.z;
    cam.rotation(1, 0) = down.x;
    cam.rotation(1, 1) = down.y;
    cam.rotation(1, 2) = down.z;
    cam.rotation(2, 0) = fwd.x;
    cam.rotation(2, 1) = fwd.y;
    cam.rotation(2, 2) = fwd.z;
    const Vec3 rc = cam.rotation * position;
    cam.translation = {-rc.x, -rc.y, -rc.z};
    return cam;
}

struct AlignedBounds {
    Vec3 min;
    Vec3 max;

    bool contains(const Vec3& p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
               p.z <= max.z;
    }
    Vec3 extent() const { return max - min; }
};

}  // namespace vistaloop
