#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <optional>
#include <vector>

#include "vistaloop/assembly.hpp"
#include "vistaloop/encoder.hpp"
#include "vistaloop/generator.hpp"
#include "vistaloop/scenario.hpp"

namespace vistaloop {

// ── 3D-projected binary masks ───────────────────────────────────────────────

struct MaskFrame {
    int view = 0;
    int frame = 0;
    int width = 0;
    int height = 0;
    std::vector<uint8_t> mask;  // 1 inside the projected silhouette

    uint8_t at(int x, int y) const { return mask[static_cast<size_t>(y) * width + x]; }
    void set(int x, int y, uint8_t v) { mask[static_cast<size_t>(y) * width + x] = v; }
};

struct MaskSequence {
    int object_index = 0;
    std::vector<MaskFrame> frames;  // present exactly where project_box is present

    const MaskFrame* find(int view, int frame) const {
        for (const auto& m : frames)
            if (m.view == view && m.frame == frame) return &m;
        return nullptr;
    }
};

// Masks use the generator's own rasterization of the category assembly, so on
// a clean render the mask equals the object's instance pixels up to occlusion.
inline MaskSequence make_masks(const ObjectSpec& spec, const std::vector<Camera>& rig, int num_frames) {
    MaskSequence seq;
    seq.object_index = spec.index;
    const auto parts = category_assembly(spec.category, spec.style_tokens);
    for (size_t v = 0; v < rig.size(); ++v) {
        const Camera& cam = rig[v];
        for (int t = 0; t < num_frames; ++t) {
            const auto box = box_at(spec, t);
            if (!box) continue;
            if (!project_box(*box, cam)) continue;
            MaskFrame mf;
            mf.view = static_cast<int>(v);
            mf.frame = t;
            mf.width = cam.width;
            mf.height = cam.height;
            mf.mask.assign(static_cast<size_t>(cam.width) * cam.height, 0);
            const auto world = assembly_world_vertices(parts, *box);
            for (const auto& verts : world) {
                const auto poly = project_convex_points(verts, complete_edges(verts.size()), cam);
                if (!poly) continue;
                fill_convex(*poly, cam.width, cam.height, [&](int x, int y) { mf.set(x, y, 1); });
            }
            seq.frames.push_back(std::move(mf));
        }
    }
    return seq;
}

// ── Proxy mesh (Eq. 8 stand-in) ─────────────────────────────────────────────

struct ProxyMesh {
    std::vector<AssemblyPart> parts;  // scaled at render time by the trajectory box
    std::string category;
    std::string color;
    std::vector<std::string> styles;
    std::map<int, BoxPose3D> anchor;   // the object's trajectory
    uint64_t embedding_fingerprint = 0;  // provenance of the conditioning e_k
};

// Deterministic table lookup from the structured tokens; the embedding is
// recorded as provenance so refinement runs are attributable to their
// conditioning.
inline ProxyMesh synthesize_proxy(const ObjectSpec& spec, const ObjectEmbedding& embedding) {
    if (!vocab::is_category(spec.category))
        throw VocabError("unknown category token '" + spec.category + "'");
    ProxyMesh mesh;
    mesh.parts = category_assembly(spec.category, spec.style_tokens);
    mesh.category = spec.category;
    mesh.color = spec.color;
    mesh.styles = spec.style_tokens;
    mesh.anchor = spec.trajectory;
    uint64_t h = 0x51a3f00dull;
    for (double v : embedding.vector.values) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        h = hash_combine(h, bits);
    }
    mesh.embedding_fingerprint = h;
    return mesh;
}

// ── Pose-guided rendering ───────────────────────────────────────────────────

struct RgbaRaster {
    int width = 0;
    int height = 0;
    Image pixels;
    std::vector<uint8_t> alpha;  // 1 inside the silhouette

    uint8_t alpha_at(int x, int y) const { return alpha[static_cast<size_t>(y) * width + x]; }
};

// Renders the proxy with the generator's shading at every (view, frame); the
// raster is fully transparent when the pose is invisible.
inline std::vector<std::vector<RgbaRaster>> render_proxy(const ProxyMesh& mesh,
                                                         const std::vector<Camera>& rig,
                                                         int num_frames,
                                                         const GlobalConditions& global) {
    const SceneSignature sig = scene_signature(global.weather, global.time_of_day);
    const Rgb base = color_token_rgb(mesh.color);
    ObjectSpec traj_only;
    traj_only.trajectory = mesh.anchor;

    std::vector<std::vector<RgbaRaster>> out(rig.size());
    for (size_t v = 0; v < rig.size(); ++v) {
        const Camera& cam = rig[v];
        out[v].resize(static_cast<size_t>(num_frames));
        for (int t = 0; t < num_frames; ++t) {
            RgbaRaster& r = out[v][static_cast<size_t>(t)];
            r.width = cam.width;
            r.height = cam.height;
            r.pixels = Image(cam.width, cam.height);
            r.alpha.assign(static_cast<size_t>(cam.width) * cam.height, 0);
            const auto box = box_at(traj_only, t);
            if (!box) continue;
            const Vec3 pc = cam.to_camera(box->center);
            if (pc.z <= cam.near_plane) continue;
            const auto world = assembly_world_vertices(mesh.parts, *box);
            for (size_t p = 0; p < mesh.parts.size(); ++p) {
                const auto poly = project_convex_points(world[p], complete_edges(world[p].size()), cam);
                if (!poly) continue;
                const Rgb shaded = shade_object_color(base, mesh.styles, mesh.parts[p].shade, sig, pc.z);
                fill_convex(*poly, cam.width, cam.height, [&](int x, int y) {
                    r.pixels.set(x, y, shaded);
                    r.alpha[static_cast<size_t>(y) * cam.width + x] = 1;
                });
            }
        }
    }
    return out;
}

// ── Compositing (Eq. 9) ─────────────────────────────────────────────────────

namespace detail {

// Chebyshev distance transform to the nearest differing pixel, two sweeps.
inline std::vector<int> chebyshev_distance(const MaskFrame& m, uint8_t from_value) {
    const int w = m.width, h = m.height;
    const int inf = w + h + 2;
    std::vector<int> d(static_cast<size_t>(w) * h, inf);
    auto at = [&](int x, int y) -> int& { return d[static_cast<size_t>(y) * w + x]; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (m.at(x, y) != from_value) at(x, y) = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int best = at(x, y);
            if (x > 0) best = std::min(best, at(x - 1, y) + 1);
            if (y > 0) {
                best = std::min(best, at(x, y - 1) + 1);
                if (x > 0) best = std::min(best, at(x - 1, y - 1) + 1);
                if (x + 1 < w) best = std::min(best, at(x + 1, y - 1) + 1);
            }
            at(x, y) = best;
        }
    for (int y = h - 1; y >= 0; --y)
        for (int x = w - 1; x >= 0; --x) {
            int best = at(x, y);
            if (x + 1 < w) best = std::min(best, at(x + 1, y) + 1);
            if (y + 1 < h) {
                best = std::min(best, at(x, y + 1) + 1);
                if (x + 1 < w) best = std::min(best, at(x + 1, y + 1) + 1);
                if (x > 0) best = std::min(best, at(x - 1, y + 1) + 1);
            }
            at(x, y) = best;
        }
    return d;
}

inline Rgb blend_rgb(Rgb fg, Rgb bg, double w) {
    auto mix = [&](uint8_t f, uint8_t b) {
        return static_cast<uint8_t>(std::lround(w * f + (1.0 - w) * b));
    };
    return {mix(fg.r, bg.r), mix(fg.g, bg.g), mix(fg.b, bg.b)};
}

}  // namespace detail

// Feathered mask compositing. Strictly inside the eroded mask the proxy wins;
// strictly outside the dilated mask the input frame is untouched (byte
// equality); the band blends linearly by signed distance to the mask
// boundary. Disoccluded pixels (mask over previous background, transparent
// proxy) copy from the nearest prior frame of the input video.
inline MultiviewVideo composite(const MultiviewVideo& video,
                                const std::vector<std::vector<RgbaRaster>>& x_obj,
                                const MaskSequence& masks, int feather_px) {
    if (feather_px < 0) throw ContractError("feather_px must be >= 0");
    MultiviewVideo out = video;
    const auto id = static_cast<uint16_t>(masks.object_index + 1);

    for (const auto& m : masks.frames) {
        const int v = m.view, t = m.frame;
        Frame& frame = out.at(v, t);
        const RgbaRaster& obj = x_obj[static_cast<size_t>(v)][static_cast<size_t>(t)];
        if (m.width != frame.pixels.width() || m.height != frame.pixels.height() ||
            obj.width != m.width || obj.height != m.height)
            throw ContractError("composite dimension mismatch");

        std::vector<int> din, dout;
        if (feather_px > 0) {
            din = detail::chebyshev_distance(m, 1);   // distance to nearest outside pixel
            dout = detail::chebyshev_distance(m, 0);  // distance to nearest inside pixel
        }

        for (int y = 0; y < m.height; ++y) {
            for (int x = 0; x < m.width; ++x) {
                double w;
                if (feather_px == 0) {
                    w = m.at(x, y) ? 1.0 : 0.0;
                } else {
                    // signed Chebyshev distance to the boundary, half-pixel centered
                    const double d = m.at(x, y)
                                         ? din[static_cast<size_t>(y) * m.width + x] - 0.5
                                         : -(dout[static_cast<size_t>(y) * m.width + x] - 0.5);
                    w = std::clamp((d + feather_px) / (2.0 * feather_px), 0.0, 1.0);
                }
                if (w <= 0.0) continue;  // outside the dilated mask: untouched

                Rgb fg;
                if (obj.alpha_at(x, y)) {
                    fg = obj.pixels.at(x, y);
                } else if (video.at(v, t).instance_ids.at(x, y) == 0 && t > 0) {
                    // temporal context: nearest prior frame of the input video
                    fg = video.at(v, t - 1).pixels.at(x, y);
                } else {
                    fg = video.at(v, t).pixels.at(x, y);
                }
                const Rgb bg = video.at(v, t).pixels.at(x, y);
                frame.pixels.set(x, y, w >= 1.0 ? fg : detail::blend_rgb(fg, bg, w));
                if (m.at(x, y)) frame.instance_ids.set(x, y, id);
            }
        }
    }
    return out;
}

inline constexpr int kDefaultFeatherPx = 2;

// Full refinement pass for one flagged object: localize, synthesize, render,
// composite.
inline MultiviewVideo refine_object(const MultiviewVideo& video, const LocalCondition& lc,
                                    const std::vector<Camera>& rig, const GlobalConditions& global,
                                    int feather_px = kDefaultFeatherPx) {
    const MaskSequence masks = make_masks(lc.spec, rig, video.num_frames);
    const ProxyMesh mesh = synthesize_proxy(lc.spec, lc.embedding);
    const auto rasters = render_proxy(mesh, rig, video.num_frames, global);
    return composite(video, rasters, masks, feather_px);
}

}  // namespace vistaloop
