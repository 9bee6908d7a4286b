#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vistaloop/common.hpp"
#include "vistaloop/vocab.hpp"

namespace vistaloop {

// Fixed rendering signature per (weather, time_of_day). The evaluator's macro
// thresholds assume this exact table, so any change here must re-verify the
// pairwise separability test.
struct SceneSignature {
    Rgb sky;
    Rgb ground;
    Rgb lane;
    double object_light = 1.0;  // multiplier applied to object colors
    double gray_mix = 0.0;      // rain: blend toward mid gray
    double fog_strength = 0.0;  // fog: depth blend toward kFogColor
};

inline constexpr Rgb kFogColor{200, 200, 200};

namespace detail {

inline uint8_t scale8(uint8_t v, double m) {
    const double x = v * m;
    return static_cast<uint8_t>(std::clamp(x, 0.0, 255.0) + 0.5);
}

inline Rgb scale_rgb(Rgb c, double m) { return {scale8(c.r, m), scale8(c.g, m), scale8(c.b, m)}; }

inline Rgb shift_rgb(Rgb c, int dr, int dg, int db) {
    auto add = [](uint8_t v, int d) {
        return static_cast<uint8_t>(std::clamp(static_cast<int>(v) + d, 0, 255));
    };
    return {add(c.r, dr), add(c.g, dg), add(c.b, db)};
}

}  // namespace detail

inline SceneSignature scene_signature(Weather w, TimeOfDay t) {
    SceneSignature sig;
    switch (w) {
        case Weather::Sunny:
            sig = {{180, 210, 235}, {120, 120, 120}, {205, 203, 180}, 1.0, 0.0, 0.0};
            break;
        case Weather::Rain:
            sig = {{138, 146, 158}, {92, 97, 106}, {168, 168, 158}, 1.0, 0.28, 0.0};
            break;
        case Weather::Fog:
            sig = {{203, 203, 205}, {174, 174, 176}, {192, 192, 186}, 1.0, 0.0, 1.0};
            break;
        case Weather::Snow:
            sig = {{214, 219, 229}, {229, 229, 233}, {198, 198, 193}, 1.0, 0.0, 0.0};
            break;
    }
    double m = 1.0;
    if (t == TimeOfDay::Dusk) m = 0.62;
    if (t == TimeOfDay::Night) m = 0.35;
    sig.sky = detail::scale_rgb(sig.sky, m);
    sig.ground = detail::scale_rgb(sig.ground, m);
    sig.lane = detail::scale_rgb(sig.lane, m);
    sig.object_light = m;
    if (t == TimeOfDay::Dusk) sig.sky = detail::shift_rgb(sig.sky, 22, 4, -14);
    return sig;
}

// Style shading shared by the generator, the proxy renderer, and the
// appearance priors.
inline Rgb apply_style(Rgb base, const std::vector<std::string>& styles) {
    Rgb c = base;
    for (const auto& s : styles) {
        if (s == "clean") c = detail::scale_rgb(c, 1.06);
        if (s == "dirty") c = detail::scale_rgb(c, 0.82);
        if (s == "modern")
            c = {detail::scale8(c.r, 0.96), detail::scale8(c.g, 0.99), detail::scale8(c.b, 1.08)};
        // "boxy" and "long" describe shape; the assembly table consumes them.
    }
    return c;
}

// Full object color pipeline at a given camera depth: style, part shade,
// time-of-day light, rain gray mix, fog depth blend.
inline Rgb shade_object_color(Rgb base, const std::vector<std::string>& styles, double part_shade,
                              const SceneSignature& sig, double depth_m) {
    Rgb c = apply_style(base, styles);
    c = detail::scale_rgb(c, part_shade);
    c = detail::scale_rgb(c, sig.object_light);
    if (sig.gray_mix > 0.0) {
        auto mix = [&](uint8_t v) {
            return static_cast<uint8_t>(std::clamp(
                v * (1.0 - sig.gray_mix) + 128.0 * sig.gray_mix * sig.object_light, 0.0, 255.0) + 0.5);
        };
        c = {mix(c.r), mix(c.g), mix(c.b)};
    }
    if (sig.fog_strength > 0.0) {
        const double f = std::clamp(depth_m / 45.0, 0.0, 0.85) * sig.fog_strength;
        auto mix = [&](uint8_t v, uint8_t fog) {
            return static_cast<uint8_t>(std::clamp(v * (1.0 - f) + fog * f, 0.0, 255.0) + 0.5);
        };
        c = {mix(c.r, kFogColor.r), mix(c.g, kFogColor.g), mix(c.b, kFogColor.b)};
    }
    return c;
}

// Macro-score normalizers: distances are in [0,1] units (255-scaled);
// score = max(0, 1 - d / tau).
inline constexpr double kTauWeather = 0.12;
inline constexpr double kTauTime = 0.25;

// Fault tint delta for weather_tint, scaled by 0.6 * severity. Chosen nearly
// luminance-neutral so only the weather attribute trips.
inline constexpr int kTintDeltaR = 60;
inline constexpr int kTintDeltaG = 0;
inline constexpr int kTintDeltaB = -55;

// Hue-rotated repaint color for the wrong_color fault. Severity scales the
// rotation up to 180 degrees; saturation is floored so achromatic bases still
// change visibly.
inline Rgb rotate_color_wheel(Rgb base, double severity) {
    const double r = base.r / 255.0, g = base.g / 255.0, b = base.b / 255.0;
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double d = mx - mn;
    double h = 0.0;
    if (d > 0.0) {
        if (mx == r)
            h = std::fmod((g - b) / d, 6.0);
        else if (mx == g)
            h = (b - r) / d + 2.0;
        else
            h = (r - g) / d + 4.0;
        h *= 60.0;
        if (h < 0) h += 360.0;
    }
    double s = mx > 0.0 ? d / mx : 0.0;
    double v = mx;
    h = std::fmod(h + 180.0 * severity, 360.0);
    s = std::max(s, 0.75);
    v = std::clamp(v, 0.35, 1.0);

    const double c = v * s;
    const double x = c * (1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0));
    const double m = v - c;
    double rr = 0, gg = 0, bb = 0;
    if (h < 60) {
        rr = c; gg = x;
    } else if (h < 120) {
        rr = x; gg = c;
    } else if (h < 180) {
        gg = c; bb = x;
    } else if (h < 240) {
        gg = x; bb = c;
    } else if (h < 300) {
        rr = x; bb = c;
    } else {
        rr = c; bb = x;
    }
    auto q = [&](double u) { return static_cast<uint8_t>(std::clamp((u + m) * 255.0, 0.0, 255.0) + 0.5); };
    return {q(rr), q(gg), q(bb)};
}

}  // namespace vistaloop
