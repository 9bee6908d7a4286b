#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vistaloop/encoder.hpp"
#include "vistaloop/evaluator.hpp"
#include "vistaloop/generator.hpp"
#include "vistaloop/refiner.hpp"

namespace vistaloop {

// Continuous axis-aligned rectangle.
struct Rect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
    bool valid() const { return x1 > x0 && y1 > y0; }
};

inline double rect_iou(const Rect& a, const Rect& b) {
    const Rect inter{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1),
                     std::min(a.y1, b.y1)};
    const double i = inter.area();
    const double u = a.area() + b.area() - i;
    return u > 0.0 ? i / u : 0.0;
}

// Projected ground-truth rectangle clamped to the image; absent when the
// visible intersection is under the crop threshold.
inline std::optional<Rect> ground_truth_rect(const ObjectSpec& spec, int frame, const Camera& cam) {
    const auto box = box_at(spec, frame);
    if (!box) return std::nullopt;
    const auto poly = project_box(*box, cam);
    if (!poly) return std::nullopt;
    const Rect clamped{std::max(0.0, poly->u_min), std::max(0.0, poly->v_min),
                       std::min<double>(cam.width, poly->u_max), std::min<double>(cam.height, poly->v_max)};
    if (!clamped.valid() || clamped.area() < kMinCropAreaPx) return std::nullopt;
    return clamped;
}

// Bounding rectangle of an instance-id mask, pixel-outline coordinates.
inline std::optional<Rect> mask_bbox(const IdBuffer& ids, uint16_t id) {
    int x0 = ids.width(), y0 = ids.height(), x1 = -1, y1 = -1;
    for (int y = 0; y < ids.height(); ++y)
        for (int x = 0; x < ids.width(); ++x)
            if (ids.at(x, y) == id) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) return std::nullopt;
    return Rect{static_cast<double>(x0), static_cast<double>(y0), x1 + 1.0, y1 + 1.0};
}

// ── Layout IoU ──────────────────────────────────────────────────────────────

struct PerObjectMetrics {
    int index = 0;
    int observations = 0;          // (v, t) cells with a visible ground-truth rect
    double layout_iou = 0.0;       // mean over observations
    bool category_correct = false;
    double text_alignment = 0.0;
    std::optional<double> image_alignment;  // absent without a reference image
    std::optional<double> index_consistency;
};

struct MetricsReport {
    double layout_iou_mean = 0.0;
    double ap_at_50 = 0.0;
    double category_accuracy = 0.0;
    double text_alignment_mean = 0.0;
    std::optional<double> image_alignment_mean;  // absent when no object has a reference
    double index_consistency_mean = 0.0;
    std::vector<PerObjectMetrics> per_object;    // observable objects, index order
    std::vector<int> never_visible;              // excluded objects
};

// ── Average precision at IoU 0.5 ────────────────────────────────────────────

struct Detection {
    double confidence = 0.0;
    int view = 0, frame = 0, object_index = 0;  // deterministic tie-break keys
    Rect bbox;
};

// Detections come straight from the instance-id buffers: bbox of each id's
// mask, confidence = mask fill fraction of its bbox.
inline std::vector<Detection> collect_detections(const MultiviewVideo& video) {
    std::vector<Detection> dets;
    for (int v = 0; v < video.views; ++v)
        for (int t = 0; t < video.num_frames; ++t) {
            const IdBuffer& ids = video.at(v, t).instance_ids;
            std::map<uint16_t, int> counts;
            for (uint16_t val : ids.values())
                if (val != 0) counts[val]++;
            for (const auto& [id, count] : counts) {
                const auto bbox = mask_bbox(ids, id);
                if (!bbox) continue;
                Detection d;
                d.bbox = *bbox;
                d.confidence = count / bbox->area();
                d.view = v;
                d.frame = t;
                d.object_index = id - 1;
                dets.push_back(d);
            }
        }
    return dets;
}

// Single-class all-point average precision with greedy matching at
// IoU >= 0.5, confidence-ranked with deterministic tie-breaks.
inline double ap_at_50(const MultiviewVideo& video, const Scenario& scenario) {
    std::vector<Detection> dets = collect_detections(video);
    std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.view != b.view) return a.view < b.view;
        if (a.frame != b.frame) return a.frame < b.frame;
        return a.object_index < b.object_index;
    });

    // Ground truth per (v, t): visible projected rects.
    struct Gt {
        Rect rect;
        bool matched = false;
    };
    std::map<std::pair<int, int>, std::vector<Gt>> gt;
    int total_gt = 0;
    for (int v = 0; v < scenario.num_views(); ++v)
        for (int t = 0; t < scenario.num_frames; ++t)
            for (const auto& spec : scenario.objects) {
                const auto rect = ground_truth_rect(spec, t, scenario.rig[static_cast<size_t>(v)]);
                if (!rect) continue;
                gt[{v, t}].push_back({*rect, false});
                ++total_gt;
            }
    if (total_gt == 0) return 0.0;

    std::vector<int> tp(dets.size(), 0);
    for (size_t i = 0; i < dets.size(); ++i) {
        auto it = gt.find({dets[i].view, dets[i].frame});
        if (it == gt.end()) continue;
        double best = 0.5;
        int best_j = -1;
        for (size_t j = 0; j < it->second.size(); ++j) {
            if (it->second[j].matched) continue;
            const double iou = rect_iou(dets[i].bbox, it->second[j].rect);
            if (iou >= best) {
                best = iou;
                best_j = static_cast<int>(j);
            }
        }
        if (best_j >= 0) {
            it->second[static_cast<size_t>(best_j)].matched = true;
            tp[i] = 1;
        }
    }

    // Precision envelope integrated over recall.
    double ap = 0.0;
    int cum_tp = 0;
    double prev_recall = 0.0;
    std::vector<double> precisions(dets.size(), 0.0), recalls(dets.size(), 0.0);
    for (size_t i = 0; i < dets.size(); ++i) {
        cum_tp += tp[i];
        precisions[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
        recalls[i] = static_cast<double>(cum_tp) / total_gt;
    }
    for (size_t i = 0; i < dets.size(); ++i) {
        double max_right = 0.0;
        for (size_t j = i; j < dets.size(); ++j) max_right = std::max(max_right, precisions[j]);
        ap += (recalls[i] - prev_recall) * max_right;
        prev_recall = recalls[i];
    }
    return ap;
}

// ── Full metrics report ─────────────────────────────────────────────────────

inline MetricsReport compute_metrics(const MultiviewVideo& video, const Scenario& scenario,
                                     const ConditionSet& conditions) {
    MetricsReport report;
    report.ap_at_50 = ap_at_50(video, scenario);

    int correct_categories = 0;
    double iou_sum = 0.0, text_sum = 0.0, ic_sum = 0.0;
    double img_sum = 0.0;
    int img_count = 0, ic_count = 0;

    for (const auto& lc : conditions.locals) {
        const ObjectSpec& spec = lc.spec;
        PerObjectMetrics pm;
        pm.index = spec.index;

        // Layout IoU over visible observations; never-visible objects are
        // excluded and listed.
        double obs_iou = 0.0;
        double expected_iou = 0.0;  // pixel-set IoU against the expected silhouette
        const MaskSequence expected = make_masks(spec, scenario.rig, scenario.num_frames);
        const auto id = static_cast<uint16_t>(spec.index + 1);
        for (int v = 0; v < video.views; ++v)
            for (int t = 0; t < video.num_frames; ++t) {
                const auto rect = ground_truth_rect(spec, t, scenario.rig[static_cast<size_t>(v)]);
                if (!rect) continue;
                ++pm.observations;
                const auto bbox = mask_bbox(video.at(v, t).instance_ids, id);
                obs_iou += bbox ? rect_iou(*bbox, *rect) : 0.0;

                const MaskFrame* mf = expected.find(v, t);
                if (mf) {
                    long inter = 0, uni = 0;
                    const IdBuffer& ids = video.at(v, t).instance_ids;
                    for (int y = 0; y < mf->height; ++y)
                        for (int x = 0; x < mf->width; ++x) {
                            const bool a = ids.at(x, y) == id;
                            const bool b = mf->at(x, y) != 0;
                            inter += (a && b) ? 1 : 0;
                            uni += (a || b) ? 1 : 0;
                        }
                    expected_iou += uni > 0 ? static_cast<double>(inter) / uni : 0.0;
                }
            }
        if (pm.observations == 0) {
            report.never_visible.push_back(spec.index);
            continue;
        }
        pm.layout_iou = obs_iou / pm.observations;
        pm.category_correct = (expected_iou / pm.observations) >= 0.5;

        const ObjectBatch batch = crop_object_batch(video, spec, scenario.rig);
        if (!batch.empty()) {
            const std::vector<double> observed = batch_visual_feature(batch);

            // Text alignment: the spec tokens mapped to their expected
            // appearance, compared in the shared projected space.
            const SceneSignature sig = scene_signature(scenario.global.weather, scenario.global.time_of_day);
            const Vec3 size = spec.trajectory.begin()->second.size;
            const FeatureVector expected_vis =
                appearance_prior(spec.category, spec.color, spec.style_tokens, size, sig);
            pm.text_alignment = cosine(visual_projection_head().apply(observed),
                                       visual_projection_head().apply(expected_vis.values));

            if (spec.reference_appearance) {
                pm.image_alignment =
                    cosine(observed, embed_appearance(*spec.reference_appearance).values);
            }
            if (batch.size() >= 2) pm.index_consistency = index_consistency(batch);
        }

        iou_sum += pm.layout_iou;
        text_sum += pm.text_alignment;
        correct_categories += pm.category_correct ? 1 : 0;
        if (pm.image_alignment) {
            img_sum += *pm.image_alignment;
            ++img_count;
        }
        if (pm.index_consistency) {
            ic_sum += *pm.index_consistency;
            ++ic_count;
        }
        report.per_object.push_back(std::move(pm));
    }

    const int n = static_cast<int>(report.per_object.size());
    if (n > 0) {
        report.layout_iou_mean = iou_sum / n;
        report.text_alignment_mean = text_sum / n;
        report.category_accuracy = static_cast<double>(correct_categories) / n;
    }
    if (img_count > 0) report.image_alignment_mean = img_sum / img_count;
    if (ic_count > 0) report.index_consistency_mean = ic_sum / ic_count;
    return report;
}

}  // namespace vistaloop
