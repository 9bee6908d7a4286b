#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vistaloop {

// ── Error taxonomy ──────────────────────────────────────────────────────────
//
// ParseError      malformed input text (position carried in the message)
// ValidationError a semantic invariant of a parsed value is violated
// VocabError      token not in one of the built-in vocabularies
// DomainError     numeric argument outside the valid domain
// ContractError   caller broke an API precondition (dimensions, ranges)

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VocabError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ── Small vector/matrix types ───────────────────────────────────────────────

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }
};

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[static_cast<size_t>(r) * 3 + static_cast<size_t>(c)]; }
    double& operator()(int r, int c) { return m[static_cast<size_t>(r) * 3 + static_cast<size_t>(c)]; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
        return t;
    }
};

constexpr double kPi = 3.14159265358979323846;

// Wrap an angle into [-pi, pi).
inline double wrap_angle(double a) {
    double w = std::fmod(a + kPi, 2.0 * kPi);
    if (w < 0) w += 2.0 * kPi;
    return w - kPi;
}

// Shortest-arc interpolation between two angles; t in [0,1].
inline double lerp_angle(double a, double b, double t) {
    const double d = wrap_angle(b - a);
    return wrap_angle(a + d * t);
}

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// ── Deterministic hashing (platform-stable) ─────────────────────────────────

// splitmix64; used for ground speckle and condition fingerprints.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) { return mix64(h ^ mix64(v)); }

}  // namespace vistaloop
