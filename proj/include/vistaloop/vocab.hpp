#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vistaloop/common.hpp"

namespace vistaloop {

enum class Weather : uint8_t { Sunny, Rain, Fog, Snow };
enum class TimeOfDay : uint8_t { Day, Dusk, Night };

namespace vocab {

inline constexpr std::array<std::string_view, 4> kWeather{"sunny", "rain", "fog", "snow"};
inline constexpr std::array<std::string_view, 3> kTime{"day", "dusk", "night"};
inline constexpr std::array<std::string_view, 6> kCategory{
    "car", "bus", "truck", "construction_vehicle", "pedestrian", "trailer"};
inline constexpr std::array<std::string_view, 7> kColor{
    "white", "black", "red", "blue", "silver", "yellow", "green"};
inline constexpr std::array<std::string_view, 5> kStyle{"clean", "dirty", "modern", "boxy", "long"};

template <size_t N>
int index_of(const std::array<std::string_view, N>& table, std::string_view token) {
    for (size_t i = 0; i < N; ++i)
        if (table[i] == token) return static_cast<int>(i);
    return -1;
}

inline Weather parse_weather(std::string_view s) {
    const int i = index_of(kWeather, s);
    if (i < 0) throw VocabError("unknown weather token '" + std::string(s) + "'");
    return static_cast<Weather>(i);
}

inline TimeOfDay parse_time(std::string_view s) {
    const int i = index_of(kTime, s);
    if (i < 0) throw VocabError("unknown time_of_day token '" + std::string(s) + "'");
    return static_cast<TimeOfDay>(i);
}

inline std::string_view weather_name(Weather w) { return kWeather[static_cast<size_t>(w)]; }
inline std::string_view time_name(TimeOfDay t) { return kTime[static_cast<size_t>(t)]; }

inline bool is_category(std::string_view s) { return index_of(kCategory, s) >= 0; }
inline bool is_color(std::string_view s) { return index_of(kColor, s) >= 0; }
inline bool is_style(std::string_view s) { return index_of(kStyle, s) >= 0; }

// Unified enumeration over every built-in vocabulary, in declaration order.
// Token index doubles as the basis-vector index for text embeddings.
inline const std::vector<std::string>& all_tokens() {
    static const std::vector<std::string> tokens = [] {
        std::vector<std::string> t;
        for (auto s : kWeather) t.emplace_back(s);
        for (auto s : kTime) t.emplace_back(s);
        for (auto s : kCategory) t.emplace_back(s);
        for (auto s : kColor) t.emplace_back(s);
        for (auto s : kStyle) t.emplace_back(s);
        return t;
    }();
    return tokens;
}

inline int token_index(std::string_view token) {
    const auto& all = all_tokens();
    for (size_t i = 0; i < all.size(); ++i)
        if (all[i] == token) return static_cast<int>(i);
    return -1;
}

}  // namespace vocab

// Base RGB for each color token, shared by the generator, the proxy
// synthesizer, and the appearance priors so all three agree exactly.
struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
};

inline Rgb color_token_rgb(std::string_view color) {
    if (color == "white") return {235, 235, 235};
    if (color == "black") return {25, 25, 30};
    if (color == "red") return {190, 40, 40};
    if (color == "blue") return {40, 60, 190};
    if (color == "silver") return {175, 178, 185};
    if (color == "yellow") return {210, 190, 40};
    if (color == "green") return {40, 170, 60};
    throw VocabError("unknown color token '" + std::string(color) + "'");
}

}  // namespace vistaloop
