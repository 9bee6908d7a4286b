#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "vistaloop/assembly.hpp"
#include "vistaloop/encoder.hpp"
#include "vistaloop/image.hpp"
#include "vistaloop/projection.hpp"
#include "vistaloop/raster.hpp"
#include "vistaloop/scenario.hpp"
#include "vistaloop/signature.hpp"
#include "vistaloop/threading.hpp"

namespace vistaloop {

struct Frame {
    Image pixels;
    IdBuffer instance_ids;  // 0 = background, k+1 = object index k
    int view = 0;
    int frame_index = 0;
};

struct MultiviewVideo {
    int views = 0;
    int num_frames = 0;
    std::vector<Frame> frames;  // dense, view-major
    uint64_t seed = 0;
    uint64_t fingerprint = 0;

    Frame& at(int v, int t) { return frames[static_cast<size_t>(v) * num_frames + t]; }
    const Frame& at(int v, int t) const { return frames[static_cast<size_t>(v) * num_frames + t]; }
};

namespace detail {

// Horizon row: image of a far-away ground point along the camera's horizontal
// forward direction. Falls back to the principal row for degenerate poses.
inline double horizon_row(const Camera& cam) {
    const Vec3 fwd{cam.rotation(2, 0), cam.rotation(2, 1), cam.rotation(2, 2)};
    Vec3 horiz{fwd.x, fwd.y, 0.0};
    const double n = horiz.norm();
    if (n < 1e-9) return cam.cy;
    horiz = horiz * (1.0 / n);
    const Vec3 center = (cam.rotation.transposed() * (cam.translation * -1.0));
    const Vec3 far{center.x + horiz.x * 1e5, center.y + horiz.y * 1e5, 0.0};
    const Vec3 pc = cam.to_camera(far);
    if (pc.z <= cam.near_plane) return cam.cy;
    return cam.fy * pc.y / pc.z + cam.cy;
}

// Static ground texture, keyed by (seed, view) so that a static scene renders
// bit-identical frames over time. Zero-mean, same delta on all channels.
inline int ground_speckle(uint64_t seed, int view, int x, int y) {
    uint64_t h = hash_combine(hash_combine(seed, static_cast<uint64_t>(view) + 1),
                              (static_cast<uint64_t>(static_cast<uint32_t>(x)) << 32) |
                                  static_cast<uint32_t>(y));
    return static_cast<int>(h % 13) - 6;
}

inline Rgb add_clamped(Rgb c, int d) {
    auto f = [&](uint8_t v) { return static_cast<uint8_t>(std::clamp(static_cast<int>(v) + d, 0, 255)); };
    return {f(c.r), f(c.g), f(c.b)};
}

struct FaultFlags {
    bool weather_tint = false;
    double tint_severity = 0.0;
    // per object index
    std::vector<std::pair<int, double>> wrong_color;  // (index, severity)
    std::vector<std::pair<int, double>> blur;
    std::vector<int> drop;
    std::vector<std::pair<int, double>> jitter;
};

inline FaultFlags resolve_faults(const std::vector<FaultSpec>& plan, const GlobalConditions& global) {
    FaultFlags f;
    for (const auto& fault : plan) {
        switch (fault.kind) {
            case FaultKind::WeatherTint:
                // Fires only while the weather emphasis stays below the
                // deactivation weight; regeneration with emphasized weather
                // turns it off.
                if (global.emphasis("weather") < fault.deactivation_weight) {
                    f.weather_tint = true;
                    f.tint_severity = std::max(f.tint_severity, fault.severity);
                }
                break;
            case FaultKind::WrongColor: f.wrong_color.emplace_back(fault.target_object, fault.severity); break;
            case FaultKind::BlurObject: f.blur.emplace_back(fault.target_object, fault.severity); break;
            case FaultKind::DropObject: f.drop.push_back(fault.target_object); break;
            case FaultKind::JitterBox: f.jitter.emplace_back(fault.target_object, fault.severity); break;
        }
    }
    return f;
}

}  // namespace detail

// Renders one (view, frame) cell. Pure function of its arguments.
inline Frame render_frame(const ConditionSet& conditions, const Camera& cam, int view, int t,
                          uint64_t seed, const detail::FaultFlags& faults) {
    const SceneSignature sig = scene_signature(conditions.global.weather, conditions.global.time_of_day);
    Frame frame;
    frame.view = view;
    frame.frame_index = t;
    frame.pixels = Image(cam.width, cam.height);
    frame.instance_ids = IdBuffer(cam.width, cam.height);

    // Background: sky above the horizon, speckled ground below.
    const double hrow = detail::horizon_row(cam);
    for (int y = 0; y < cam.height; ++y) {
        const bool sky = (y + 0.5) < hrow;
        for (int x = 0; x < cam.width; ++x) {
            if (sky) {
                frame.pixels.set(x, y, sig.sky);
            } else {
                frame.pixels.set(x, y, detail::add_clamped(sig.ground, detail::ground_speckle(seed, view, x, y)));
            }
        }
    }

    // Lane polylines on the ground plane.
    for (const auto& poly : conditions.global.road_map) {
        for (size_t i = 0; i + 1 < poly.size(); ++i) {
            Vec3 a{poly[i].x, poly[i].y, 0.0};
            Vec3 b{poly[i + 1].x, poly[i + 1].y, 0.0};
            Vec3 ca = cam.to_camera(a);
            Vec3 cb = cam.to_camera(b);
            if (ca.z <= cam.near_plane && cb.z <= cam.near_plane) continue;
            if (ca.z <= cam.near_plane || cb.z <= cam.near_plane) {
                const double tt = (cam.near_plane - ca.z) / (cb.z - ca.z);
                const Vec3 hit{ca.x + (cb.x - ca.x) * tt, ca.y + (cb.y - ca.y) * tt, cam.near_plane};
                (ca.z <= cam.near_plane ? ca : cb) = hit;
            }
            fill_segment(project_camera_point(cam, ca), project_camera_point(cam, cb), 1.1, cam.width,
                         cam.height, [&](int x, int y) { frame.pixels.set(x, y, sig.lane); });
        }
    }

    // Objects, painter's order: far to near by box-center camera depth, ties
    // by ascending index.
    struct Draw {
        double depth;
        int index;
        const LocalCondition* lc;
        BoxPose3D box;
    };
    std::vector<Draw> draws;
    for (const auto& lc : conditions.locals) {
        if (std::find(faults.drop.begin(), faults.drop.end(), lc.spec.index) != faults.drop.end() &&
            (t % 2) == 1)
            continue;  // drop_object omits odd frames
        const auto box = box_at(lc.spec, t);
        if (!box) continue;
        const Vec3 pc = cam.to_camera(box->center);
        if (pc.z <= cam.near_plane) continue;
        draws.push_back({pc.z, lc.spec.index, &lc, *box});
    }
    std::sort(draws.begin(), draws.end(), [](const Draw& a, const Draw& b) {
        return a.depth > b.depth || (a.depth == b.depth && a.index < b.index);
    });

    for (const auto& d : draws) {
        double jitter_px = 0.0;
        for (const auto& [idx, sev] : faults.jitter)
            if (idx == d.index) jitter_px = std::ceil(10.0 * sev) * ((t % 2) ? 1.0 : -1.0);

        const Rgb base = color_token_rgb(d.lc->spec.color);
        const auto parts = category_assembly(d.lc->spec.category, d.lc->spec.style_tokens);
        const auto world = assembly_world_vertices(parts, d.box);
        const auto id = static_cast<uint16_t>(d.index + 1);
        for (size_t p = 0; p < parts.size(); ++p) {
            auto poly = project_convex_points(world[p], complete_edges(world[p].size()), cam);
            if (!poly) continue;
            if (jitter_px != 0.0) {
                for (auto& pt : poly->hull) pt.x += jitter_px;
                poly->u_min += jitter_px;
                poly->u_max += jitter_px;
            }
            const Rgb shaded = shade_object_color(base, d.lc->spec.style_tokens, parts[p].shade, sig, d.depth);
            fill_convex(*poly, cam.width, cam.height, [&](int x, int y) {
                frame.pixels.set(x, y, shaded);
                frame.instance_ids.set(x, y, id);
            });
        }
    }

    // Appearance faults, applied last in a fixed order.
    for (const auto& [idx, sev] : faults.wrong_color) {
        const Rgb repaint = rotate_color_wheel(color_token_rgb(
            [&] {
                for (const auto& lc : conditions.locals)
                    if (lc.spec.index == idx) return lc.spec.color;
                return std::string("white");
            }()), sev);
        const auto id = static_cast<uint16_t>(idx + 1);
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x)
                if (frame.instance_ids.at(x, y) == id) frame.pixels.set(x, y, repaint);
    }
    for (const auto& [idx, sev] : faults.blur) {
        const LocalCondition* lc = nullptr;
        for (const auto& c : conditions.locals)
            if (c.spec.index == idx) lc = &c;
        if (!lc) continue;
        const auto box = box_at(lc->spec, t);
        if (!box) continue;
        const auto poly = project_box(*box, cam);
        if (!poly) continue;
        const int x0 = std::max(0, static_cast<int>(std::floor(poly->u_min)));
        const int y0 = std::max(0, static_cast<int>(std::floor(poly->v_min)));
        const int x1 = std::min(cam.width, static_cast<int>(std::ceil(poly->u_max)));
        const int y1 = std::min(cam.height, static_cast<int>(std::ceil(poly->v_max)));
        if (x1 - x0 <= 0 || y1 - y0 <= 0) continue;
        const int radius = static_cast<int>(std::ceil(3.0 * sev));
        const Image blurred = box_blur(frame.pixels.crop(x0, y0, x1 - x0, y1 - y0), radius);
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x) frame.pixels.set(x, y, blurred.at(x - x0, y - y0));
    }
    if (faults.weather_tint) {
        const double f = 0.6 * faults.tint_severity;
        auto tint = [&](uint8_t v, int delta) {
            return static_cast<uint8_t>(std::clamp(v + delta * f, 0.0, 255.0));
        };
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x) {
                const Rgb c = frame.pixels.at(x, y);
                frame.pixels.set(x, y, {tint(c.r, kTintDeltaR), tint(c.g, kTintDeltaG), tint(c.b, kTintDeltaB)});
            }
    }
    return frame;
}

// Procedural multiview renderer: V x T frames plus instance-id buffers,
// bit-identical for identical (conditions, seed, fault_plan, iteration)
// regardless of worker count. `iteration` is forwarded to scripted faults;
// the built-in fault kinds key off emphasis weights and frame parity instead.
inline MultiviewVideo render_scene(const ConditionSet& conditions, const std::vector<Camera>& rig,
                                   int num_frames, uint64_t seed,
                                   const std::vector<FaultSpec>& fault_plan, int iteration = 0,
                                   int threads = -1) {
    (void)iteration;
    if (rig.empty() || num_frames < 1) throw ContractError("render_scene needs >= 1 camera and frame");
    const detail::FaultFlags faults = detail::resolve_faults(fault_plan, conditions.global);

    MultiviewVideo video;
    video.views = static_cast<int>(rig.size());
    video.num_frames = num_frames;
    video.seed = seed;
    video.fingerprint = conditions_fingerprint(conditions);
    video.frames.resize(static_cast<size_t>(video.views) * num_frames);

    parallel_for(video.views * num_frames, [&](int cell) {
        const int v = cell / num_frames;
        const int t = cell % num_frames;
        video.frames[static_cast<size_t>(cell)] = render_frame(conditions, rig[static_cast<size_t>(v)], v, t, seed, faults);
    }, threads);
    return video;
}

}  // namespace vistaloop
