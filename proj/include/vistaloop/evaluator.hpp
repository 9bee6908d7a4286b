#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vistaloop/encoder.hpp"
#include "vistaloop/generator.hpp"
#include "vistaloop/threading.hpp"

namespace vistaloop {

// ── Object batches (Eq. 6 analog) ───────────────────────────────────────────

struct CropRecord {
    int view = 0;
    int frame = 0;
    Image pixels;
};

struct ObjectBatch {
    int object_index = 0;
    std::vector<CropRecord> crops;  // at most V * T entries

    bool empty() const { return crops.empty(); }
    size_t size() const { return crops.size(); }
};

// Integer pixel rectangle of a projected box clipped to the image; empty when
// the intersection is under the minimum crop area.
inline constexpr int kMinCropAreaPx = 16;

inline std::optional<std::array<int, 4>> crop_rect(const ScreenPolygon& poly, int width, int height) {
    const int x0 = std::max(0, static_cast<int>(std::floor(poly.u_min)));
    const int y0 = std::max(0, static_cast<int>(std::floor(poly.v_min)));
    const int x1 = std::min(width, static_cast<int>(std::ceil(poly.u_max)));
    const int y1 = std::min(height, static_cast<int>(std::ceil(poly.v_max)));
    if (x1 - x0 <= 0 || y1 - y0 <= 0) return std::nullopt;
    if ((x1 - x0) * (y1 - y0) < kMinCropAreaPx) return std::nullopt;
    return std::array<int, 4>{x0, y0, x1, y1};
}

// Crops one object across every view and frame where its projected box
// meaningfully intersects the image. May be empty.
inline ObjectBatch crop_object_batch(const MultiviewVideo& video, const ObjectSpec& spec,
                                     const std::vector<Camera>& rig) {
    ObjectBatch batch;
    batch.object_index = spec.index;
    for (int v = 0; v < video.views; ++v) {
        for (int t = 0; t < video.num_frames; ++t) {
            const auto box = box_at(spec, t);
            if (!box) continue;
            const auto poly = project_box(*box, rig[static_cast<size_t>(v)]);
            if (!poly) continue;
            const auto rect = crop_rect(*poly, rig[static_cast<size_t>(v)].width, rig[static_cast<size_t>(v)].height);
            if (!rect) continue;
            const auto [x0, y0, x1, y1] = *rect;
            batch.crops.push_back({v, t, video.at(v, t).pixels.crop(x0, y0, x1 - x0, y1 - y0)});
        }
    }
    return batch;
}

// ── Clarity (sharpness proxy in Eq. 7) ──────────────────────────────────────

// Population variance of the 3x3 discrete Laplacian over luminance. Crops too
// small for an interior are scored 0.
inline double laplacian_variance(const Image& img) {
    const int w = img.width(), h = img.height();
    if (w < 3 || h < 3) return 0.0;
    std::vector<double> vals;
    vals.reserve(static_cast<size_t>(w - 2) * (h - 2));
    for (int y = 1; y + 1 < h; ++y)
        for (int x = 1; x + 1 < w; ++x) {
            const double c = luminance(img.at(x, y));
            const double l = luminance(img.at(x - 1, y)) + luminance(img.at(x + 1, y)) +
                             luminance(img.at(x, y - 1)) + luminance(img.at(x, y + 1)) - 4.0 * c;
            vals.push_back(l);
        }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return var / static_cast<double>(vals.size());
}

struct ClarityScore {
    std::vector<double> per_crop;  // min-max normalized over the batch
    double mean = 0.0;
};

inline ClarityScore clarity_score(const ObjectBatch& batch) {
    if (batch.empty()) throw ContractError("clarity_score requires a nonempty batch");
    std::vector<double> raw;
    raw.reserve(batch.size());
    for (const auto& c : batch.crops) raw.push_back(laplacian_variance(c.pixels));
    const double lo = *std::min_element(raw.begin(), raw.end());
    const double hi = *std::max_element(raw.begin(), raw.end());
    ClarityScore out;
    out.per_crop.reserve(raw.size());
    for (double r : raw) out.per_crop.push_back(hi == lo ? 1.0 : (r - lo) / (hi - lo));
    for (double q : out.per_crop) out.mean += q;
    out.mean /= static_cast<double>(out.per_crop.size());
    return out;
}

// ── Macro scene assessment (Eq. 4 analog) ───────────────────────────────────

struct SceneStats {
    std::array<double, 3> sky_mean{};  // mean RGB over the top 40% rows, 0..1
    double luminance_mean = 0.0;       // (sky + ground region luma) / 2
    double contrast = 0.0;             // std of luma over the full frame
};

// Statistics from the front view (view 0), averaged over frames.
inline SceneStats extract_scene_stats(const MultiviewVideo& video) {
    SceneStats acc;
    for (int t = 0; t < video.num_frames; ++t) {
        const Image& img = video.at(0, t).pixels;
        const int h = img.height(), w = img.width();
        const int sky_rows = std::max(1, h * 2 / 5);
        const int ground_from = h - std::max(1, h * 2 / 5);

        double sr = 0, sg = 0, sb = 0, sky_lum = 0, ground_lum = 0;
        double all = 0, all2 = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const Rgb c = img.at(x, y);
                const double lum = luminance(c);
                all += lum;
                all2 += lum * lum;
                if (y < sky_rows) {
                    sr += c.r / 255.0;
                    sg += c.g / 255.0;
                    sb += c.b / 255.0;
                    sky_lum += lum;
                }
                if (y >= ground_from) ground_lum += lum;
            }
        const double nsky = static_cast<double>(sky_rows) * w;
        const double nground = static_cast<double>(h - ground_from) * w;
        const double nall = static_cast<double>(h) * w;
        acc.sky_mean[0] += sr / nsky;
        acc.sky_mean[1] += sg / nsky;
        acc.sky_mean[2] += sb / nsky;
        acc.luminance_mean += 0.5 * (sky_lum / nsky + ground_lum / nground);
        const double mean = all / nall;
        acc.contrast += std::sqrt(std::max(0.0, all2 / nall - mean * mean));
    }
    const double T = static_cast<double>(video.num_frames);
    for (auto& v : acc.sky_mean) v /= T;
    acc.luminance_mean /= T;
    acc.contrast /= T;
    return acc;
}

struct MacroAssessment {
    double s_macro = 0.0;
    std::map<std::string, double> per_attribute;  // "weather", "time"
    SceneStats stats;
};

// Per-attribute score = max(0, 1 - d / tau) against the conditioned
// signature; s_macro is the mean over attributes.
inline MacroAssessment assess_macro(const MultiviewVideo& video, const GlobalConditions& global) {
    const SceneSignature sig = scene_signature(global.weather, global.time_of_day);
    MacroAssessment out;
    out.stats = extract_scene_stats(video);

    const double dw = std::sqrt(((out.stats.sky_mean[0] - sig.sky.r / 255.0) * (out.stats.sky_mean[0] - sig.sky.r / 255.0) +
                                 (out.stats.sky_mean[1] - sig.sky.g / 255.0) * (out.stats.sky_mean[1] - sig.sky.g / 255.0) +
                                 (out.stats.sky_mean[2] - sig.sky.b / 255.0) * (out.stats.sky_mean[2] - sig.sky.b / 255.0)) / 3.0);
    const double expected_lum = 0.5 * (luminance(sig.sky) + luminance(sig.ground));
    const double dt = std::abs(out.stats.luminance_mean - expected_lum);

    out.per_attribute["weather"] = std::max(0.0, 1.0 - dw / kTauWeather);
    out.per_attribute["time"] = std::max(0.0, 1.0 - dt / kTauTime);
    double sum = 0.0;
    for (const auto& [k, v] : out.per_attribute) sum += v;
    out.s_macro = sum / static_cast<double>(out.per_attribute.size());
    return out;
}

// ── Object assessment (Eq. 7) ───────────────────────────────────────────────

struct ObjectScore {
    double s_obj = 0.0;
    double semantic = 0.0;  // cosine in the shared projected space, [-1, 1]
    double clarity = 0.0;   // batch-level min-max normalized sharpness, [0, 1]
};

// Mean appearance embedding over the batch's crops.
inline std::vector<double> batch_visual_feature(const ObjectBatch& batch) {
    if (batch.empty()) throw ContractError("batch_visual_feature requires a nonempty batch");
    std::vector<double> mean(EncoderConfig::kVisDim, 0.0);
    for (const auto& c : batch.crops) {
        const FeatureVector f = embed_appearance(c.pixels);
        for (size_t i = 0; i < mean.size(); ++i) mean[i] += f.values[i];
    }
    for (auto& v : mean) v /= static_cast<double>(batch.size());
    return mean;
}

inline ObjectScore assess_object(const ObjectBatch& batch, const ObjectEmbedding& embedding,
                                 double lambda) {
    if (batch.empty()) throw ContractError("assess_object requires a nonempty batch");
    if (!(lambda > 0.0 && lambda < 1.0)) throw ContractError("lambda must lie in (0, 1)");

    const std::vector<double> projected_visual =
        l2_normalized(visual_projection_head().apply(batch_visual_feature(batch)));
    const std::vector<double> projected_condition =
        l2_normalized(condition_projection_head().apply(embedding.condition_features));

    ObjectScore score;
    score.semantic = cosine(projected_visual, projected_condition);
    score.clarity = clarity_score(batch).mean;
    score.s_obj = lambda * score.semantic + (1.0 - lambda) * score.clarity;
    return score;
}

// ── Index consistency ───────────────────────────────────────────────────────

// Mean pairwise cosine of per-crop appearance embeddings. Requires >= 2
// crops; the caller reports "insufficient observations" otherwise.
inline double index_consistency(const ObjectBatch& batch) {
    if (batch.size() < 2) throw ContractError("index_consistency requires >= 2 crops");
    std::vector<std::vector<double>> feats;
    feats.reserve(batch.size());
    for (const auto& c : batch.crops) feats.push_back(embed_appearance(c.pixels).values);
    double sum = 0.0;
    int pairs = 0;
    for (size_t i = 0; i < feats.size(); ++i)
        for (size_t j = i + 1; j < feats.size(); ++j) {
            sum += cosine(feats[i], feats[j]);
            ++pairs;
        }
    return sum / pairs;
}

// ── Full report ─────────────────────────────────────────────────────────────

enum class ObjectStatus : uint8_t { Scored, Unobservable, InsufficientObservations };

inline std::string_view object_status_name(ObjectStatus s) {
    switch (s) {
        case ObjectStatus::Scored: return "scored";
        case ObjectStatus::Unobservable: return "unobservable";
        case ObjectStatus::InsufficientObservations: return "insufficient_observations";
    }
    return "?";
}

struct ObjectAssessment {
    int index = 0;
    ObjectStatus status = ObjectStatus::Scored;
    ObjectScore score;                  // valid unless Unobservable
    std::optional<double> index_consistency;  // absent below 2 crops
    int crop_count = 0;
};

struct AssessmentReport {
    double s_macro = 0.0;
    std::map<std::string, double> per_attribute_macro;
    std::map<int, ObjectAssessment> objects;
    double lambda = 0.0;
};

inline ObjectAssessment assess_one_object(const MultiviewVideo& video, const LocalCondition& lc,
                                          const std::vector<Camera>& rig, double lambda) {
    ObjectAssessment oa;
    oa.index = lc.spec.index;
    const ObjectBatch batch = crop_object_batch(video, lc.spec, rig);
    oa.crop_count = static_cast<int>(batch.size());
    if (batch.empty()) {
        oa.status = ObjectStatus::Unobservable;
        return oa;
    }
    oa.score = assess_object(batch, lc.embedding, lambda);
    if (batch.size() >= 2)
        oa.index_consistency = index_consistency(batch);
    else
        oa.status = ObjectStatus::InsufficientObservations;
    return oa;
}

// Evaluates the whole video against its conditions. Per-object work is
// independent and may fan out across workers.
inline AssessmentReport evaluate_video(const MultiviewVideo& video, const ConditionSet& conditions,
                                       const std::vector<Camera>& rig, double lambda,
                                       int threads = -1) {
    AssessmentReport report;
    report.lambda = lambda;
    const MacroAssessment macro = assess_macro(video, conditions.global);
    report.s_macro = macro.s_macro;
    report.per_attribute_macro = macro.per_attribute;

    std::vector<ObjectAssessment> slots(conditions.locals.size());
    parallel_for(static_cast<int>(conditions.locals.size()), [&](int i) {
        slots[static_cast<size_t>(i)] =
            assess_one_object(video, conditions.locals[static_cast<size_t>(i)], rig, lambda);
    }, threads);
    for (auto& oa : slots) report.objects.emplace(oa.index, std::move(oa));
    return report;
}

}  // namespace vistaloop
