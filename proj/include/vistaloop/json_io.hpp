#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include <json.hpp>

#include "vistaloop/evaluator.hpp"
#include "vistaloop/loop.hpp"
#include "vistaloop/metrics.hpp"

namespace vistaloop {

// Deterministic JSON text: object keys sorted (nlohmann's default ordering),
// every number printed with 9 significant digits. Two runs with identical
// state produce identical bytes.
inline std::string dump_deterministic(const nlohmann::json& j) {
    using nlohmann::json;
    std::string out;
    std::function<void(const json&)> emit = [&](const json& node) {
        switch (node.type()) {
            case json::value_t::null: out += "null"; break;
            case json::value_t::boolean: out += node.get<bool>() ? "true" : "false"; break;
            case json::value_t::string: {
                out += json(node.get<std::string>()).dump();
                break;
            }
            case json::value_t::number_integer:
            case json::value_t::number_unsigned: {
                out += node.dump();
                break;
            }
            case json::value_t::number_float: {
                char buf[48];
                std::snprintf(buf, sizeof(buf), "%.9g", node.get<double>());
                out += buf;
                break;
            }
            case json::value_t::array: {
                out += '[';
                bool first = true;
                for (const auto& e : node) {
                    if (!first) out += ',';
                    first = false;
                    emit(e);
                }
                out += ']';
                break;
            }
            case json::value_t::object: {
                out += '{';
                bool first = true;
                for (auto it = node.begin(); it != node.end(); ++it) {
                    if (!first) out += ',';
                    first = false;
                    out += json(it.key()).dump();
                    out += ':';
                    emit(it.value());
                }
                out += '}';
                break;
            }
            default: out += "null"; break;
        }
    };
    emit(j);
    out += '\n';
    return out;
}

// ── Report serializers ──────────────────────────────────────────────────────

inline nlohmann::json report_to_json(const AssessmentReport& report, double gamma_g, double gamma_o) {
    nlohmann::json j;
    j["s_macro"] = report.s_macro;
    j["per_attribute_macro"] = nlohmann::json::object();
    for (const auto& [k, v] : report.per_attribute_macro) j["per_attribute_macro"][k] = v;
    j["lambda"] = report.lambda;
    j["thresholds"] = {{"gamma_g", gamma_g}, {"gamma_o", gamma_o}};
    j["objects"] = nlohmann::json::array();
    for (const auto& [index, oa] : report.objects) {
        nlohmann::json o;
        o["index"] = index;
        o["status"] = std::string(object_status_name(oa.status));
        if (oa.status != ObjectStatus::Unobservable) {
            o["s_obj"] = oa.score.s_obj;
            o["semantic"] = oa.score.semantic;
            o["clarity"] = oa.score.clarity;
        }
        if (oa.index_consistency)
            o["index_consistency"] = *oa.index_consistency;
        else
            o["index_consistency"] = nullptr;
        o["crops"] = oa.crop_count;
        j["objects"].push_back(o);
    }
    return j;
}

inline nlohmann::json decision_to_json(const Decision& d) {
    nlohmann::json j;
    j["kind"] = std::string(decision_kind_name(d.kind));
    j["flagged_attributes"] = d.flagged_attributes;
    j["flagged_objects"] = d.flagged_objects;
    return j;
}

inline nlohmann::json audit_to_json(const AuditLog& log, const LoopConfig& config) {
    nlohmann::json j;
    j["status"] = log.status == LoopStatus::Pass ? "pass" : "budget_exhausted";
    j["iterations"] = nlohmann::json::array();
    for (const auto& e : log.iterations) {
        nlohmann::json it;
        it["iteration"] = e.iteration;
        it["emphasis_weights"] = nlohmann::json::object();
        for (const auto& [k, v] : e.emphasis_weights) it["emphasis_weights"][k] = v;
        it["routed"] = decision_to_json(e.routed);
        it["decision"] = decision_to_json(e.decision);
        it["refinements"] = e.refinements;
        it["report"] = report_to_json(e.report, config.gamma_g, config.gamma_o);
        j["iterations"].push_back(it);
    }
    return j;
}

inline nlohmann::json metrics_to_json(const MetricsReport& m) {
    nlohmann::json j;
    j["layout_iou_mean"] = m.layout_iou_mean;
    j["ap_at_50"] = m.ap_at_50;
    j["category_accuracy"] = m.category_accuracy;
    j["text_alignment_mean"] = m.text_alignment_mean;
    if (m.image_alignment_mean)
        j["image_alignment_mean"] = *m.image_alignment_mean;
    else
        j["image_alignment_mean"] = nullptr;
    j["index_consistency_mean"] = m.index_consistency_mean;
    j["never_visible"] = m.never_visible;
    j["per_object"] = nlohmann::json::array();
    for (const auto& pm : m.per_object) {
        nlohmann::json o;
        o["index"] = pm.index;
        o["observations"] = pm.observations;
        o["layout_iou"] = pm.layout_iou;
        o["category_correct"] = pm.category_correct;
        o["text_alignment"] = pm.text_alignment;
        if (pm.image_alignment)
            o["image_alignment"] = *pm.image_alignment;
        else
            o["image_alignment"] = nullptr;
        if (pm.index_consistency)
            o["index_consistency"] = *pm.index_consistency;
        else
            o["index_consistency"] = nullptr;
        j["per_object"].push_back(o);
    }
    return j;
}

}  // namespace vistaloop
