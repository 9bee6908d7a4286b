#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "vistaloop/assembly.hpp"
#include "vistaloop/features.hpp"
#include "vistaloop/image.hpp"
#include "vistaloop/raster.hpp"
#include "vistaloop/scenario.hpp"
#include "vistaloop/signature.hpp"
#include "vistaloop/vocab.hpp"

namespace vistaloop {

// ── Geometric features ──────────────────────────────────────────────────────

// Componentwise normalization of (x, y, z, l, w, h, yaw) into [0,1]:
// positions against the bounds, sizes against the bounds extent per axis,
// yaw against [-pi, pi).
inline std::array<double, 7> normalize_box_components(const BoxPose3D& box,
                                                      const AlignedBounds& bounds) {
    const Vec3 ext = bounds.extent();
    const char* axes = "xyz";
    const double center[3] = {box.center.x, box.center.y, box.center.z};
    const double bmin[3] = {bounds.min.x, bounds.min.y, bounds.min.z};
    const double bmax[3] = {bounds.max.x, bounds.max.y, bounds.max.z};
    std::array<double, 7> b{};
    for (int i = 0; i < 3; ++i) {
        if (center[i] < bmin[i] || center[i] > bmax[i])
            throw DomainError(std::string("box center outside scene bounds on axis ") + axes[i]);
        const double e = bmax[i] - bmin[i];
        b[static_cast<size_t>(i)] = (center[i] - bmin[i]) / e;
    }
    b[3] = box.size.x / ext.x;
    b[4] = box.size.y / ext.y;
    b[5] = box.size.z / ext.z;
    b[6] = (box.yaw + kPi) / (2.0 * kPi);
    return b;
}

// [sin(2^k pi b_j), cos(2^k pi b_j)] in k-major, j-minor, sin-before-cos
// order; length 14 * k_freq.
inline std::vector<double> fourier_features(const std::array<double, 7>& b, int k_freq) {
    if (k_freq < 1) throw ContractError("k_freq must be >= 1");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(14 * k_freq));
    for (int k = 0; k < k_freq; ++k) {
        const double scale = std::ldexp(kPi, k);  // 2^k * pi
        for (int j = 0; j < 7; ++j) {
            out.push_back(std::sin(scale * b[static_cast<size_t>(j)]));
            out.push_back(std::cos(scale * b[static_cast<size_t>(j)]));
        }
    }
    return out;
}

inline FeatureVector fourier_encode_box(const BoxPose3D& box, const AlignedBounds& bounds,
                                        int k_freq = EncoderConfig::kFreq) {
    FeatureVector f;
    f.tag = FeatureTag::Geo;
    f.values = fourier_features(normalize_box_components(box, bounds), k_freq);
    return f;
}

// ── Text features ───────────────────────────────────────────────────────────

// Normalized sum of canonical basis vectors, one per vocabulary token, over
// the unified vocabulary enumeration.
inline FeatureVector embed_text(const std::string& category, const std::string& color,
                                const std::vector<std::string>& style_tokens) {
    if (!vocab::is_category(category)) throw VocabError("unknown category token '" + category + "'");
    if (!vocab::is_color(color)) throw VocabError("unknown color token '" + color + "'");
    FeatureVector f;
    f.tag = FeatureTag::Txt;
    f.values.assign(EncoderConfig::kTokDim, 0.0);
    auto add = [&](const std::string& token) {
        const int idx = vocab::token_index(token);
        if (idx < 0) throw VocabError("unknown token '" + token + "'");
        f.values[static_cast<size_t>(idx)] += 1.0;
    };
    add(category);
    add(color);
    for (const auto& s : style_tokens) {
        if (!vocab::is_style(s)) throw VocabError("unknown style token '" + s + "'");
        add(s);
    }
    f.values = l2_normalized(std::move(f.values));
    return f;
}

// ── Appearance features ─────────────────────────────────────────────────────

// concat(mean RGB, 4x4 luma grid, 8-bin hue histogram), each block
// l2-normalized. Achromatic pixels do not vote in the hue histogram, which
// keeps the block invariant to pure brightness scaling.
inline FeatureVector embed_appearance(const Image& img) {
    if (img.empty()) throw DomainError("cannot embed a zero-pixel image");
    const int w = img.width(), h = img.height();

    std::vector<double> mean_rgb(3, 0.0);
    std::vector<double> grid(16, 0.0);
    std::vector<double> grid_count(16, 0.0);
    std::vector<double> hue(8, 0.0);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Rgb c = img.at(x, y);
            mean_rgb[0] += c.r / 255.0;
            mean_rgb[1] += c.g / 255.0;
            mean_rgb[2] += c.b / 255.0;

            const int cell = std::min(3, y * 4 / h) * 4 + std::min(3, x * 4 / w);
            grid[static_cast<size_t>(cell)] += luminance(c);
            grid_count[static_cast<size_t>(cell)] += 1.0;

            const int mx = std::max({c.r, c.g, c.b});
            const int mn = std::min({c.r, c.g, c.b});
            if (mx > mn) {
                const double d = mx - mn;
                double hdeg = 0.0;
                if (mx == c.r)
                    hdeg = 60.0 * std::fmod((c.g - c.b) / d, 6.0);
                else if (mx == c.g)
                    hdeg = 60.0 * ((c.b - c.r) / d + 2.0);
                else
                    hdeg = 60.0 * ((c.r - c.g) / d + 4.0);
                if (hdeg < 0) hdeg += 360.0;
                hue[static_cast<size_t>(std::min(7, static_cast<int>(hdeg / 45.0)))] += 1.0;
            }
        }
    }
    const double n = static_cast<double>(img.pixel_count());
    for (auto& v : mean_rgb) v /= n;
    for (size_t i = 0; i < 16; ++i)
        if (grid_count[i] > 0) grid[i] /= grid_count[i];

    FeatureVector f;
    f.tag = FeatureTag::Vis;
    f.values.reserve(EncoderConfig::kVisDim);
    for (double v : l2_normalized(std::move(mean_rgb))) f.values.push_back(v);
    for (double v : l2_normalized(std::move(grid))) f.values.push_back(v);
    for (double v : l2_normalized(std::move(hue))) f.values.push_back(v);
    return f;
}

// Expected appearance of an object that has no reference image: the category
// assembly rendered orthographically over the scene's ground color, then
// embedded. Shares the shading pipeline with the generator so that a faithful
// render scores high against it.
inline Image expected_appearance_patch(const std::string& category, const std::string& color,
                                       const std::vector<std::string>& styles, const Vec3& size,
                                       const SceneSignature& sig) {
    constexpr int kPatch = 40;
    constexpr double kAzimuth = 40.0 * kPi / 180.0;
    constexpr double kElevation = 18.0 * kPi / 180.0;
    constexpr double kNominalDepth = 15.0;

    const Vec3 dir{std::cos(kElevation) * std::cos(kAzimuth), std::cos(kElevation) * std::sin(kAzimuth),
                   -std::sin(kElevation)};
    Vec3 right = cross(dir, Vec3{0, 0, 1});
    right = right * (1.0 / right.norm());
    const Vec3 up = cross(right, dir);

    const auto parts = category_assembly(category, styles);
    const BoxPose3D pose{{0, 0, 0}, size, 0.0};
    const auto world = assembly_world_vertices(parts, pose);

    // Orthographic projection, then per-axis stretch to a tight patch, the
    // same way a bounding-box crop normalizes each axis.
    std::vector<std::vector<Vec2>> projected(parts.size());
    double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
    for (size_t p = 0; p < parts.size(); ++p) {
        for (const auto& q : world[p]) {
            const Vec2 s{q.dot(right), -q.dot(up)};
            projected[p].push_back(s);
            u0 = std::min(u0, s.x);
            u1 = std::max(u1, s.x);
            v0 = std::min(v0, s.y);
            v1 = std::max(v1, s.y);
        }
    }
    const double su = (kPatch - 2.0) / std::max(1e-9, u1 - u0);
    const double sv = (kPatch - 2.0) / std::max(1e-9, v1 - v0);

    const Rgb base = color_token_rgb(color);
    Image patch(kPatch, kPatch, sig.ground);
    for (size_t p = 0; p < parts.size(); ++p) {
        std::vector<Vec2> pts;
        pts.reserve(projected[p].size());
        for (const auto& s : projected[p])
            pts.push_back({(s.x - u0) * su + 1.0, (s.y - v0) * sv + 1.0});
        const ScreenPolygon poly = make_screen_polygon(std::move(pts));
        const Rgb shaded = shade_object_color(base, styles, parts[p].shade, sig, kNominalDepth);
        fill_convex(poly, kPatch, kPatch, [&](int x, int y) { patch.set(x, y, shaded); });
    }
    return patch;
}

inline FeatureVector appearance_prior(const std::string& category, const std::string& color,
                                      const std::vector<std::string>& styles, const Vec3& size,
                                      const SceneSignature& sig) {
    return embed_appearance(expected_appearance_patch(category, color, styles, size, sig));
}

// ── Fusion (identity-tracked object embedding) ──────────────────────────────

// Sinusoidal identity code; depends only on the object index.
inline std::vector<double> identity_code_values(int object_index) {
    std::vector<double> code(EncoderConfig::kFusedDim);
    for (int d = 0; d < EncoderConfig::kFusedDim / 2; ++d) {
        const double freq = std::pow(10000.0, -2.0 * d / EncoderConfig::kFusedDim);
        code[static_cast<size_t>(2 * d)] = std::sin(object_index * freq);
        code[static_cast<size_t>(2 * d + 1)] = std::cos(object_index * freq);
    }
    return code;
}

struct ObjectEmbedding {
    int object_index = 0;
    FeatureVector vector;         // fused embedding, tanh(W x) + identity code
    FeatureVector identity_code;  // same length as the fused vector
    // Pre-fusion concat (geo | txt | vis). The condition projection head reads
    // the expected-appearance block from here; the fused vector alone is not
    // linearly invertible.
    std::vector<double> condition_features;
};

inline const LinearMap& fusion_matrix() {
    static const LinearMap w = seeded_uniform_map(EncoderConfig::kFusedDim,
                                                  EncoderConfig::kConcatDim,
                                                  EncoderConfig::kFusionSeed);
    return w;
}

inline ObjectEmbedding fuse_object_embedding(const FeatureVector& f_geo, const FeatureVector& f_txt,
                                             const FeatureVector& f_vis, int object_index) {
    check_feature(f_geo, FeatureTag::Geo);
    check_feature(f_txt, FeatureTag::Txt);
    check_feature(f_vis, FeatureTag::Vis);

    ObjectEmbedding e;
    e.object_index = object_index;
    e.condition_features.reserve(EncoderConfig::kConcatDim);
    e.condition_features.insert(e.condition_features.end(), f_geo.values.begin(), f_geo.values.end());
    e.condition_features.insert(e.condition_features.end(), f_txt.values.begin(), f_txt.values.end());
    e.condition_features.insert(e.condition_features.end(), f_vis.values.begin(), f_vis.values.end());

    std::vector<double> h = fusion_matrix().apply(e.condition_features);
    for (double& v : h) v = std::tanh(v);
    const std::vector<double> code = identity_code_values(object_index);
    for (size_t i = 0; i < h.size(); ++i) h[i] += code[i];

    e.vector = {std::move(h), FeatureTag::Fused};
    e.identity_code = {code, FeatureTag::Fused};
    return e;
}

// ── Projection heads (shared semantic space) ────────────────────────────────
//
// Both heads factor through the same isometry into the 32-dim shared space:
//   visual head    = R32 * P * M           (input: appearance feature, 27)
//   condition head = R32 * P * M * Pi_vis  (input: pre-fusion concat, 115)
// where M centers each appearance block (removing the positive-orthant bias
// that would otherwise floor every cosine near 1), P is a seeded orthonormal
// 32x27 basis and R32 a seeded 32x32 rotation. Because the isometry is
// shared, the cosine in the shared space equals the cosine of the centered
// appearance blocks, which is what makes matched observed/expected pairs
// score near 1 and color mismatches score near or below 0.

inline LinearMap block_centering_matrix() {
    LinearMap m;
    m.rows = m.cols = EncoderConfig::kVisDim;
    m.w.assign(static_cast<size_t>(m.rows) * m.cols, 0.0);
    const int block_start[4] = {0, 3, 19, 27};
    for (int b = 0; b < 3; ++b) {
        const int s = block_start[b], e = block_start[b + 1];
        const double k = e - s;
        for (int r = s; r < e; ++r)
            for (int c = s; c < e; ++c) m.at(r, c) = (r == c ? 1.0 : 0.0) - 1.0 / k;
    }
    return m;
}

inline LinearMap vis_block_selector() {
    LinearMap m;
    m.rows = EncoderConfig::kVisDim;
    m.cols = EncoderConfig::kConcatDim;
    m.w.assign(static_cast<size_t>(m.rows) * m.cols, 0.0);
    const int offset = EncoderConfig::kGeoDim + EncoderConfig::kTokDim;
    for (int r = 0; r < m.rows; ++r) m.at(r, offset + r) = 1.0;
    return m;
}

inline const LinearMap& visual_projection_head() {
    static const LinearMap head = [] {
        const LinearMap p = seeded_orthonormal_map(EncoderConfig::kSharedDim, EncoderConfig::kVisDim,
                                                   EncoderConfig::kVisualHeadSeed);
        const LinearMap r = seeded_orthonormal_map(EncoderConfig::kSharedDim, EncoderConfig::kSharedDim,
                                                   EncoderConfig::kConditionHeadSeed);
        return matmul(r, matmul(p, block_centering_matrix()));
    }();
    return head;
}

inline const LinearMap& condition_projection_head() {
    static const LinearMap head = matmul(visual_projection_head(), vis_block_selector());
    return head;
}

// ── Condition assembly (Eq. 2 analog) ───────────────────────────────────────

struct LocalCondition {
    ObjectEmbedding embedding;
    ObjectSpec spec;  // the raw (trajectory, tokens, reference) control signal
};

struct ConditionSet {
    GlobalConditions global;
    std::vector<LocalCondition> locals;  // ordered by object index
};

inline ObjectEmbedding encode_object(const ObjectSpec& spec, const Scenario& scenario) {
    const int mid = spec.first_frame() + (spec.last_frame() - spec.first_frame()) / 2;
    const auto box = box_at(spec, mid);
    if (!box) throw ContractError("object trajectory has no midpoint sample");
    const FeatureVector f_geo = fourier_encode_box(*box, scenario.scene_bounds);
    const FeatureVector f_txt = embed_text(spec.category, spec.color, spec.style_tokens);
    const SceneSignature sig = scene_signature(scenario.global.weather, scenario.global.time_of_day);
    const FeatureVector f_vis = spec.reference_appearance
                                    ? embed_appearance(*spec.reference_appearance)
                                    : appearance_prior(spec.category, spec.color, spec.style_tokens,
                                                       box->size, sig);
    return fuse_object_embedding(f_geo, f_txt, f_vis, spec.index);
}

inline ConditionSet build_conditions(const Scenario& scenario) {
    ConditionSet set;
    set.global = scenario.global;
    set.locals.reserve(scenario.objects.size());
    for (const auto& spec : scenario.objects)  // already index-sorted
        set.locals.push_back({encode_object(spec, scenario), spec});
    return set;
}

// Fingerprint over the fields the generator consumes; recorded in the video.
inline uint64_t conditions_fingerprint(const ConditionSet& c) {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    h = hash_combine(h, static_cast<uint64_t>(c.global.weather));
    h = hash_combine(h, static_cast<uint64_t>(c.global.time_of_day));
    for (const auto& [attr, w] : c.global.emphasis_weights) {
        for (char ch : attr) h = hash_combine(h, static_cast<uint64_t>(ch));
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(double));
        std::memcpy(&bits, &w, sizeof(bits));
        h = hash_combine(h, bits);
    }
    for (const auto& lc : c.locals) {
        h = hash_combine(h, static_cast<uint64_t>(lc.embedding.object_index));
        for (double v : lc.embedding.vector.values) {
            uint64_t bits;
            std::memcpy(&bits, &v, sizeof(bits));
            h = hash_combine(h, bits);
        }
    }
    return h;
}

}  // namespace vistaloop
