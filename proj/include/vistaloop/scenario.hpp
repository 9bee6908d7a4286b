#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vistaloop/common.hpp"
#include "vistaloop/geometry.hpp"
#include "vistaloop/image.hpp"
#include "vistaloop/vocab.hpp"

namespace vistaloop {

// Emphasis weights grow multiplicatively on regeneration; the cap keeps the
// loop's termination argument finite.
inline constexpr double kMaxEmphasisWeight = 8.0;

struct GlobalConditions {
    Weather weather = Weather::Sunny;
    TimeOfDay time_of_day = TimeOfDay::Day;
    std::vector<EgoPose> ego_trajectory;          // index == frame
    std::vector<std::vector<Vec2>> road_map;      // lane polylines, world meters
    std::map<std::string, double> emphasis_weights;  // attribute -> weight >= 1

    double emphasis(const std::string& attribute) const {
        auto it = emphasis_weights.find(attribute);
        return it == emphasis_weights.end() ? 1.0 : it->second;
    }
};

struct ObjectSpec {
    int index = 0;
    std::string category;
    std::string color;
    std::vector<std::string> style_tokens;
    std::map<int, BoxPose3D> trajectory;  // keyframes; interpolation fills between
    std::string reference_appearance_path;  // empty when absent
    std::optional<Image> reference_appearance;  // loaded lazily from the path

    int first_frame() const { return trajectory.begin()->first; }
    int last_frame() const { return trajectory.rbegin()->first; }
};

enum class FaultKind : uint8_t { WeatherTint, WrongColor, BlurObject, DropObject, JitterBox };

inline std::string_view fault_kind_name(FaultKind k) {
    switch (k) {
        case FaultKind::WeatherTint: return "weather_tint";
        case FaultKind::WrongColor: return "wrong_color";
        case FaultKind::BlurObject: return "blur_object";
        case FaultKind::DropObject: return "drop_object";
        case FaultKind::JitterBox: return "jitter_box";
    }
    return "?";
}

inline FaultKind parse_fault_kind(std::string_view s) {
    if (s == "weather_tint") return FaultKind::WeatherTint;
    if (s == "wrong_color") return FaultKind::WrongColor;
    if (s == "blur_object") return FaultKind::BlurObject;
    if (s == "drop_object") return FaultKind::DropObject;
    if (s == "jitter_box") return FaultKind::JitterBox;
    throw VocabError("unknown fault kind '" + std::string(s) + "'");
}

struct FaultSpec {
    FaultKind kind = FaultKind::WeatherTint;
    bool targets_global = true;
    int target_object = -1;  // valid when !targets_global
    double deactivation_weight = kMaxEmphasisWeight + 1.0;  // weather faults stop at/above this
    double severity = 1.0;  // in (0, 1]
};

struct Scenario {
    GlobalConditions global;
    std::vector<ObjectSpec> objects;  // sorted by index
    std::vector<Camera> rig;
    int num_frames = 0;
    AlignedBounds scene_bounds;
    std::vector<FaultSpec> fault_plan;

    int num_views() const { return static_cast<int>(rig.size()); }
    const ObjectSpec* find_object(int index) const {
        for (const auto& o : objects)
            if (o.index == index) return &o;
        return nullptr;
    }
};

// Trajectory sample at an integer frame. Absent outside the object's defined
// range; sparse keyframes are filled by linear interpolation (shortest arc
// for yaw).
inline std::optional<BoxPose3D> box_at(const ObjectSpec& spec, int frame) {
    if (spec.trajectory.empty()) return std::nullopt;
    if (frame < spec.first_frame() || frame > spec.last_frame()) return std::nullopt;
    auto hi = spec.trajectory.lower_bound(frame);
    if (hi->first == frame) return hi->second;
    auto lo = std::prev(hi);
    const double t = double(frame - lo->first) / double(hi->first - lo->first);
    return interpolate_box(lo->second, hi->second, t);
}

// ── Validation ──────────────────────────────────────────────────────────────
// Pure predicate: returns the list of violated invariants (empty == valid).

inline std::vector<std::string> scenario_violations(const Scenario& s) {
    std::vector<std::string> out;
    if (s.rig.empty()) out.push_back("rig must contain at least one camera");
    if (s.num_frames < 1) out.push_back("num_frames must be >= 1");
    for (size_t v = 0; v < s.rig.size(); ++v) {
        try {
            s.rig[v].check();
        } catch (const ValidationError& e) {
            out.push_back("camera " + std::to_string(v) + ": " + e.what());
        }
    }

    if (!(s.scene_bounds.min.x < s.scene_bounds.max.x && s.scene_bounds.min.y < s.scene_bounds.max.y &&
          s.scene_bounds.min.z < s.scene_bounds.max.z))
        out.push_back("scene_bounds must have positive extent on every axis");

    // Ego trajectory covers 0..T-1 exactly once (stored dense by frame).
    if (static_cast<int>(s.global.ego_trajectory.size()) != s.num_frames)
        out.push_back("ego_trajectory must cover every frame index 0..T-1 exactly once");

    for (const auto& [attr, w] : s.global.emphasis_weights) {
        if (!(w >= 1.0 && w <= kMaxEmphasisWeight))
            out.push_back("emphasis weight for '" + attr + "' outside [1, " +
                          std::to_string(kMaxEmphasisWeight) + "]");
    }

    std::vector<int> seen;
    for (const auto& o : s.objects) {
        const std::string tag = "object " + std::to_string(o.index);
        if (o.index < 0) out.push_back(tag + ": index must be non-negative");
        if (std::find(seen.begin(), seen.end(), o.index) != seen.end())
            out.push_back("duplicate object index " + std::to_string(o.index));
        seen.push_back(o.index);

        if (!vocab::is_category(o.category)) out.push_back(tag + ": unknown category '" + o.category + "'");
        if (!vocab::is_color(o.color)) out.push_back(tag + ": unknown color '" + o.color + "'");
        for (const auto& st : o.style_tokens)
            if (!vocab::is_style(st)) out.push_back(tag + ": unknown style '" + st + "'");

        if (o.trajectory.empty()) {
            out.push_back(tag + ": trajectory is empty");
            continue;
        }
        if (o.first_frame() < 0 || o.last_frame() >= s.num_frames)
            out.push_back(tag + ": trajectory range outside [0, num_frames)");
        for (const auto& [f, box] : o.trajectory) {
            try {
                box.check();
            } catch (const ValidationError& e) {
                out.push_back(tag + " frame " + std::to_string(f) + ": " + e.what());
            }
            if (!s.scene_bounds.contains(box.center))
                out.push_back(tag + " frame " + std::to_string(f) + ": box center outside scene_bounds");
        }
        if (o.reference_appearance &&
            (o.reference_appearance->width() > 64 || o.reference_appearance->height() > 64 ||
             o.reference_appearance->empty()))
            out.push_back(tag + ": reference_appearance must be a non-empty raster <= 64x64");
    }

    for (size_t i = 0; i < s.fault_plan.size(); ++i) {
        const auto& f = s.fault_plan[i];
        const std::string tag = "fault " + std::to_string(i);
        const bool global_kind = f.kind == FaultKind::WeatherTint;
        if (global_kind != f.targets_global)
            out.push_back(tag + ": target inconsistent with kind " + std::string(fault_kind_name(f.kind)));
        if (!f.targets_global) {
            bool found = false;
            for (const auto& o : s.objects) found = found || o.index == f.target_object;
            if (!found)
                out.push_back(tag + ": target object " + std::to_string(f.target_object) + " does not exist");
        }
        if (!(f.severity > 0.0 && f.severity <= 1.0)) out.push_back(tag + ": severity outside (0, 1]");
    }
    return out;
}

// ── Parsing / serialization ─────────────────────────────────────────────────

namespace detail {

using json = nlohmann::json;

inline double num_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError(std::string("missing or non-numeric field '") + key + "'");
    return j[key].get<double>();
}

inline std::string str_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        throw ParseError(std::string("missing or non-string field '") + key + "'");
    return j[key].get<std::string>();
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario syntax error: ") + e.what());
    }

    Scenario s;
    try {
        const json& g = j.at("global");
        s.global.weather = vocab::parse_weather(detail::str_field(g, "weather"));
        s.global.time_of_day = vocab::parse_time(detail::str_field(g, "time_of_day"));

        s.num_frames = static_cast<int>(detail::num_field(j, "num_frames"));
        if (s.num_frames < 1) throw ParseError("num_frames must be >= 1");

        std::map<int, EgoPose> ego;
        for (const auto& e : g.at("ego_trajectory")) {
            const int f = static_cast<int>(detail::num_field(e, "frame"));
            if (ego.count(f)) throw ParseError("duplicate ego_trajectory frame " + std::to_string(f));
            ego[f] = EgoPose{detail::num_field(e, "x"), detail::num_field(e, "y"),
                             detail::num_field(e, "yaw")};
        }
        for (int f = 0; f < s.num_frames; ++f) {
            auto it = ego.find(f);
            if (it == ego.end())
                throw ParseError("ego_trajectory gap: frame " + std::to_string(f) + " missing");
            s.global.ego_trajectory.push_back(it->second);
        }
        if (static_cast<int>(ego.size()) != s.num_frames)
            throw ParseError("ego_trajectory contains frames outside [0, num_frames)");

        if (g.contains("road_map")) {
            for (const auto& line : g.at("road_map")) {
                std::vector<Vec2> poly;
                for (const auto& pt : line) {
                    if (!pt.is_array() || pt.size() != 2) throw ParseError("road_map point must be [x, y]");
                    poly.push_back({pt[0].get<double>(), pt[1].get<double>()});
                }
                s.global.road_map.push_back(std::move(poly));
            }
        }
        if (g.contains("emphasis_weights")) {
            for (auto it = g["emphasis_weights"].begin(); it != g["emphasis_weights"].end(); ++it)
                s.global.emphasis_weights[it.key()] = it.value().get<double>();
        }
        s.global.emphasis_weights.try_emplace("weather", 1.0);
        s.global.emphasis_weights.try_emplace("time", 1.0);

        const json& bounds = j.at("scene_bounds");
        const auto& bmin = bounds.at("min");
        const auto& bmax = bounds.at("max");
        if (bmin.size() != 3 || bmax.size() != 3) throw ParseError("scene_bounds min/max must have 3 components");
        s.scene_bounds.min = {bmin[0].get<double>(), bmin[1].get<double>(), bmin[2].get<double>()};
        s.scene_bounds.max = {bmax[0].get<double>(), bmax[1].get<double>(), bmax[2].get<double>()};

        for (const auto& c : j.at("rig")) {
            Camera cam;
            cam.fx = detail::num_field(c, "fx");
            cam.fy = detail::num_field(c, "fy");
            cam.cx = detail::num_field(c, "cx");
            cam.cy = detail::num_field(c, "cy");
            cam.width = static_cast<int>(detail::num_field(c, "width"));
            cam.height = static_cast<int>(detail::num_field(c, "height"));
            cam.near_plane = detail::num_field(c, "near");
            const auto& rot = c.at("rotation");
            if (rot.size() != 9) throw ParseError("camera rotation must have 9 row-major entries");
            for (int k = 0; k < 9; ++k) cam.rotation.m[static_cast<size_t>(k)] = rot[static_cast<size_t>(k)].get<double>();
            const auto& tr = c.at("translation");
            if (tr.size() != 3) throw ParseError("camera translation must have 3 entries");
            cam.translation = {tr[0].get<double>(), tr[1].get<double>(), tr[2].get<double>()};
            s.rig.push_back(cam);
        }

        if (j.contains("objects")) {
            for (const auto& o : j.at("objects")) {
                ObjectSpec spec;
                spec.index = static_cast<int>(detail::num_field(o, "index"));
                spec.category = detail::str_field(o, "category");
                spec.color = detail::str_field(o, "color");
                if (o.contains("style_tokens"))
                    for (const auto& st : o["style_tokens"]) spec.style_tokens.push_back(st.get<std::string>());
                const auto& size = o.at("size");
                if (size.size() != 3) throw ParseError("object size must be [l, w, h]");
                const Vec3 lwh{size[0].get<double>(), size[1].get<double>(), size[2].get<double>()};
                for (const auto& k : o.at("trajectory")) {
                    const int f = static_cast<int>(detail::num_field(k, "frame"));
                    if (spec.trajectory.count(f))
                        throw ParseError("object " + std::to_string(spec.index) +
                                         ": duplicate trajectory frame " + std::to_string(f));
                    spec.trajectory.emplace(
                        f, BoxPose3D{{detail::num_field(k, "x"), detail::num_field(k, "y"),
                                      detail::num_field(k, "z")},
                                     lwh,
                                     wrap_angle(detail::num_field(k, "yaw"))});
                }
                if (o.contains("reference_appearance"))
                    spec.reference_appearance_path = o["reference_appearance"].get<std::string>();
                s.objects.push_back(std::move(spec));
            }
        }
        std::sort(s.objects.begin(), s.objects.end(),
                  [](const ObjectSpec& a, const ObjectSpec& b) { return a.index < b.index; });

        if (j.contains("faults")) {
            for (const auto& f : j.at("faults")) {
                FaultSpec fs;
                fs.kind = parse_fault_kind(detail::str_field(f, "kind"));
                const auto& target = f.at("target");
                if (target.is_string() && target.get<std::string>() == "global") {
                    fs.targets_global = true;
                } else if (target.is_number()) {
                    fs.targets_global = false;
                    fs.target_object = target.get<int>();
                } else {
                    throw ParseError("fault target must be \"global\" or an object index");
                }
                if (f.contains("deactivation_weight"))
                    fs.deactivation_weight = f["deactivation_weight"].get<double>();
                fs.severity = detail::num_field(f, "severity");
                s.fault_plan.push_back(fs);
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario structure error: ") + e.what());
    }

    const auto violations = scenario_violations(s);
    if (!violations.empty()) throw ValidationError(violations.front());
    return s;
}

// Loads reference appearance rasters (PPM) named by the scenario, resolving
// relative paths against base_dir.
inline void load_references(Scenario& s, const std::string& base_dir) {
    for (auto& o : s.objects) {
        if (o.reference_appearance_path.empty() || o.reference_appearance) continue;
        std::string path = o.reference_appearance_path;
        if (!path.empty() && path[0] != '/' && !base_dir.empty()) path = base_dir + "/" + path;
        o.reference_appearance = decode_ppm(read_file(path));
        if (o.reference_appearance->width() > 64 || o.reference_appearance->height() > 64)
            throw ValidationError("object " + std::to_string(o.index) +
                                  ": reference_appearance larger than 64x64");
    }
}

inline std::string serialize_scenario(const Scenario& s) {
    using detail::json;
    json j;
    json g;
    g["weather"] = std::string(vocab::weather_name(s.global.weather));
    g["time_of_day"] = std::string(vocab::time_name(s.global.time_of_day));
    g["ego_trajectory"] = json::array();
    for (size_t f = 0; f < s.global.ego_trajectory.size(); ++f) {
        const auto& e = s.global.ego_trajectory[f];
        g["ego_trajectory"].push_back(
            {{"frame", static_cast<int>(f)}, {"x", e.x}, {"y", e.y}, {"yaw", e.yaw}});
    }
    g["road_map"] = json::array();
    for (const auto& poly : s.global.road_map) {
        json line = json::array();
        for (const auto& p : poly) line.push_back({p.x, p.y});
        g["road_map"].push_back(line);
    }
    g["emphasis_weights"] = json::object();
    for (const auto& [k, v] : s.global.emphasis_weights) g["emphasis_weights"][k] = v;
    j["global"] = g;

    j["num_frames"] = s.num_frames;
    j["scene_bounds"] = {{"min", {s.scene_bounds.min.x, s.scene_bounds.min.y, s.scene_bounds.min.z}},
                         {"max", {s.scene_bounds.max.x, s.scene_bounds.max.y, s.scene_bounds.max.z}}};

    j["rig"] = json::array();
    for (const auto& c : s.rig) {
        json cam;
        cam["fx"] = c.fx;
        cam["fy"] = c.fy;
        cam["cx"] = c.cx;
        cam["cy"] = c.cy;
        cam["width"] = c.width;
        cam["height"] = c.height;
        cam["near"] = c.near_plane;
        cam["rotation"] = json::array();
        for (double v : c.rotation.m) cam["rotation"].push_back(v);
        cam["translation"] = {c.translation.x, c.translation.y, c.translation.z};
        j["rig"].push_back(cam);
    }

    j["objects"] = json::array();
    for (const auto& o : s.objects) {
        json obj;
        obj["index"] = o.index;
        obj["category"] = o.category;
        obj["color"] = o.color;
        obj["style_tokens"] = o.style_tokens;
        const Vec3 lwh = o.trajectory.begin()->second.size;
        obj["size"] = {lwh.x, lwh.y, lwh.z};
        obj["trajectory"] = json::array();
        for (const auto& [f, box] : o.trajectory)
            obj["trajectory"].push_back({{"frame", f},
                                         {"x", box.center.x},
                                         {"y", box.center.y},
                                         {"z", box.center.z},
                                         {"yaw", box.yaw}});
        if (!o.reference_appearance_path.empty()) obj["reference_appearance"] = o.reference_appearance_path;
        j["objects"].push_back(obj);
    }

    j["faults"] = detail::json::array();
    for (const auto& f : s.fault_plan) {
        json jf;
        jf["kind"] = std::string(fault_kind_name(f.kind));
        if (f.targets_global)
            jf["target"] = "global";
        else
            jf["target"] = f.target_object;
        jf["deactivation_weight"] = f.deactivation_weight;
        jf["severity"] = f.severity;
        j["faults"].push_back(jf);
    }
    return j.dump(2);
}

}  // namespace vistaloop
