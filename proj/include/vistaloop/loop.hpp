#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "vistaloop/evaluator.hpp"
#include "vistaloop/generator.hpp"
#include "vistaloop/refiner.hpp"
#include "vistaloop/scenario.hpp"

namespace vistaloop {

struct LoopConfig {
    double gamma_g = 0.8;       // macro threshold
    double gamma_o = 0.7;       // per-object threshold
    double lambda = 0.6;        // Eq. 7 blend
    double alpha_emphasis = 2.0;
    int max_iterations = 5;
    uint64_t seed = 42;
    int feather_px = kDefaultFeatherPx;
    bool apply_faults = true;
    int threads = -1;

    void check() const {
        if (!(gamma_g > 0.0 && gamma_g < 1.0)) throw ContractError("gamma_g must lie in (0, 1)");
        if (!(gamma_o > 0.0 && gamma_o < 1.0)) throw ContractError("gamma_o must lie in (0, 1)");
        if (!(lambda > 0.0 && lambda < 1.0)) throw ContractError("lambda must lie in (0, 1)");
        if (!(alpha_emphasis > 1.0)) throw ContractError("alpha_emphasis must exceed 1");
        if (max_iterations < 1 || max_iterations > 32)
            throw ContractError("max_iterations must lie in [1, 32]");
        if (feather_px < 0) throw ContractError("feather_px must be >= 0");
    }
};

enum class DecisionKind : uint8_t { Pass, Regenerate, Refine };

inline std::string_view decision_kind_name(DecisionKind k) {
    switch (k) {
        case DecisionKind::Pass: return "pass";
        case DecisionKind::Regenerate: return "regenerate";
        case DecisionKind::Refine: return "refine";
    }
    return "?";
}

struct Decision {
    DecisionKind kind = DecisionKind::Pass;
    std::vector<std::string> flagged_attributes;  // nonempty iff Regenerate
    std::vector<int> flagged_objects;             // nonempty iff Refine, ascending
};

// Major flaws dominate: a macro failure regenerates regardless of object
// scores; otherwise objects under gamma_o are flagged for refinement.
// Unobservable objects are never flagged.
inline Decision route(const AssessmentReport& report, const LoopConfig& config) {
    Decision d;
    if (report.s_macro < config.gamma_g) {
        d.kind = DecisionKind::Regenerate;
        for (const auto& [attr, score] : report.per_attribute_macro)
            if (score < config.gamma_g) d.flagged_attributes.push_back(attr);
        return d;
    }
    for (const auto& [index, oa] : report.objects) {
        if (oa.status == ObjectStatus::Unobservable) continue;
        if (oa.score.s_obj < config.gamma_o) d.flagged_objects.push_back(index);
    }
    if (!d.flagged_objects.empty()) {
        d.kind = DecisionKind::Refine;
        std::sort(d.flagged_objects.begin(), d.flagged_objects.end());
    }
    return d;
}

// Eq. 5's Emphasize: multiply flagged attribute weights by alpha, capped at
// the global maximum; everything else is untouched.
inline GlobalConditions emphasize(const GlobalConditions& global,
                                  const std::vector<std::string>& flagged, double alpha) {
    if (flagged.empty()) throw ContractError("emphasize requires a nonempty attribute list");
    GlobalConditions out = global;
    for (const auto& attr : flagged) {
        auto it = out.emphasis_weights.find(attr);
        if (it == out.emphasis_weights.end())
            throw ContractError("unknown emphasis attribute '" + attr + "'");
        it->second = std::min(it->second * alpha, kMaxEmphasisWeight);
    }
    return out;
}

enum class LoopStatus : uint8_t { Pass, BudgetExhausted };

struct AuditEntry {
    int iteration = 0;  // 1-based
    std::map<std::string, double> emphasis_weights;  // snapshot entering the iteration
    AssessmentReport report;   // final state of the iteration (post-refinement)
    Decision routed;           // decision from the initial evaluation
    Decision decision;         // concluding decision after any refinement
    std::vector<int> refinements;  // object indices refined this iteration
};

struct AuditLog {
    LoopStatus status = LoopStatus::Pass;
    std::vector<AuditEntry> iterations;
};

struct LoopResult {
    MultiviewVideo video;
    AuditLog log;
};

// The closed loop: render, evaluate, route; regenerate with emphasized
// conditions on a major flaw, refine flagged objects in place on minor flaws.
// The generator seed never changes across iterations; only the conditions do.
inline LoopResult run_closed_loop(const Scenario& scenario, const LoopConfig& config) {
    config.check();
    Scenario scn = scenario;  // local copy carries evolving emphasis weights
    const std::vector<FaultSpec> faults = config.apply_faults ? scn.fault_plan : std::vector<FaultSpec>{};

    LoopResult result;
    result.log.status = LoopStatus::BudgetExhausted;

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        const ConditionSet conditions = build_conditions(scn);
        MultiviewVideo video = render_scene(conditions, scn.rig, scn.num_frames, config.seed, faults,
                                            iter, config.threads);
        AssessmentReport report = evaluate_video(video, conditions, scn.rig, config.lambda, config.threads);
        const Decision routed = route(report, config);

        AuditEntry entry;
        entry.iteration = iter;
        entry.emphasis_weights = scn.global.emphasis_weights;
        entry.routed = routed;

        Decision final_decision = routed;
        if (routed.kind == DecisionKind::Refine) {
            for (int index : routed.flagged_objects) {  // ascending
                const LocalCondition* lc = nullptr;
                for (const auto& c : conditions.locals)
                    if (c.spec.index == index) lc = &c;
                video = refine_object(video, *lc, scn.rig, scn.global, config.feather_px);
                entry.refinements.push_back(index);
            }
            // Partial re-evaluation: refined objects plus the macro score.
            const MacroAssessment macro = assess_macro(video, conditions.global);
            report.s_macro = macro.s_macro;
            report.per_attribute_macro = macro.per_attribute;
            for (int index : routed.flagged_objects) {
                for (const auto& c : conditions.locals)
                    if (c.spec.index == index)
                        report.objects[index] = assess_one_object(video, c, scn.rig, config.lambda);
            }
            final_decision = route(report, config);
        }

        entry.report = report;
        entry.decision = final_decision;
        result.log.iterations.push_back(std::move(entry));
        result.video = std::move(video);

        if (final_decision.kind == DecisionKind::Pass) {
            result.log.status = LoopStatus::Pass;
            break;
        }
        if (final_decision.kind == DecisionKind::Regenerate)
            scn.global = emphasize(scn.global, final_decision.flagged_attributes, config.alpha_emphasis);
        // An unresolved refine decision re-enters the loop; the render is
        // deterministic, so this converges to budget exhaustion if the
        // refinement cannot clear the threshold.
    }
    return result;
}

}  // namespace vistaloop
