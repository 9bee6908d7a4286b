#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vistaloop/common.hpp"

namespace vistaloop {

enum class FeatureTag : uint8_t { Geo, Txt, Vis, Fused, Scene };

// Embedding dimensions. Small fixed sizes keep the oracles cheap while the
// cosine-based checks stay well conditioned.
struct EncoderConfig {
    static constexpr int kFreq = 4;                       // Fourier frequencies per component
    static constexpr int kGeoDim = 2 * kFreq * 7;         // 56
    static constexpr int kTokDim = 32;                    // >= total vocabulary size (25)
    static constexpr int kVisDim = 27;                    // mean RGB 3 + luma grid 16 + hue hist 8
    static constexpr int kFusedDim = 64;                  // D_e
    static constexpr int kConcatDim = kGeoDim + kTokDim + kVisDim;  // 115
    static constexpr int kSharedDim = 32;                 // projection-head target space

    static constexpr uint64_t kFusionSeed = 0xC0FFEE;
    static constexpr uint64_t kVisualHeadSeed = 0xFACE;
    static constexpr uint64_t kConditionHeadSeed = 0xBEEF;
};

struct FeatureVector {
    std::vector<double> values;
    FeatureTag tag = FeatureTag::Geo;

    int dim() const { return static_cast<int>(values.size()); }
};

inline int expected_dim(FeatureTag tag) {
    switch (tag) {
        case FeatureTag::Geo: return EncoderConfig::kGeoDim;
        case FeatureTag::Txt: return EncoderConfig::kTokDim;
        case FeatureTag::Vis: return EncoderConfig::kVisDim;
        case FeatureTag::Fused: return EncoderConfig::kFusedDim;
        case FeatureTag::Scene: return EncoderConfig::kVisDim;
    }
    return 0;
}

inline void check_feature(const FeatureVector& f, FeatureTag tag) {
    if (f.tag != tag) throw ContractError("feature tag mismatch");
    if (f.dim() != expected_dim(tag)) throw ContractError("feature dimension mismatch");
    for (double v : f.values)
        if (!std::isfinite(v)) throw ContractError("non-finite feature component");
}

// ── Linear algebra on flat vectors ──────────────────────────────────────────

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];  // fixed ascending order
    return s;
}

inline double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

inline std::vector<double> l2_normalized(std::vector<double> v) {
    const double n = norm(v);
    if (n > 0.0)
        for (double& x : v) x /= n;
    return v;
}

// Dense row-major matrix for the fixed seeded maps.
struct LinearMap {
    int rows = 0;
    int cols = 0;
    std::vector<double> w;  // rows * cols

    double at(int r, int c) const { return w[static_cast<size_t>(r) * cols + c]; }
    double& at(int r, int c) { return w[static_cast<size_t>(r) * cols + c]; }

    std::vector<double> apply(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != cols) throw ContractError("linear map input dimension mismatch");
        std::vector<double> y(static_cast<size_t>(rows), 0.0);
        for (int r = 0; r < rows; ++r) {
            double s = 0.0;
            for (int c = 0; c < cols; ++c) s += at(r, c) * x[static_cast<size_t>(c)];
            y[static_cast<size_t>(r)] = s;
        }
        return y;
    }
};

inline LinearMap matmul(const LinearMap& a, const LinearMap& b) {
    if (a.cols != b.rows) throw ContractError("matmul dimension mismatch");
    LinearMap out;
    out.rows = a.rows;
    out.cols = b.cols;
    out.w.assign(static_cast<size_t>(out.rows) * out.cols, 0.0);
    for (int r = 0; r < a.rows; ++r)
        for (int k = 0; k < a.cols; ++k) {
            const double arc = a.at(r, k);
            if (arc == 0.0) continue;
            for (int c = 0; c < b.cols; ++c) out.at(r, c) += arc * b.at(k, c);
        }
    return out;
}

// Deterministic uniform in [0,1): top 53 bits of mt19937_64 output.
// std::uniform_real_distribution is implementation-defined, so it is avoided.
inline double next_uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// Entries drawn row-major from uniform(-a, a) with a = 1 / sqrt(cols).
inline LinearMap seeded_uniform_map(int rows, int cols, uint64_t seed) {
    LinearMap m;
    m.rows = rows;
    m.cols = cols;
    m.w.resize(static_cast<size_t>(rows) * cols);
    std::mt19937_64 rng(seed);
    const double a = 1.0 / std::sqrt(static_cast<double>(cols));
    for (auto& v : m.w) v = (2.0 * next_uniform01(rng) - 1.0) * a;
    return m;
}

// Orthonormal columns (rows >= cols): Gram-Schmidt over seeded Gaussian-free
// uniform columns, fixed iteration order. Result satisfies Q^T Q = I, so the
// map is an isometry of the column space.
inline LinearMap seeded_orthonormal_map(int rows, int cols, uint64_t seed) {
    if (rows < cols) throw ContractError("orthonormal map requires rows >= cols");
    LinearMap q;
    q.rows = rows;
    q.cols = cols;
    q.w.assign(static_cast<size_t>(rows) * cols, 0.0);
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> basis;
    basis.reserve(static_cast<size_t>(cols));
    while (static_cast<int>(basis.size()) < cols) {
        std::vector<double> v(static_cast<size_t>(rows));
        for (auto& x : v) x = 2.0 * next_uniform01(rng) - 1.0;
        for (const auto& b : basis) {
            const double d = dot(v, b);
            for (size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
        }
        const double n = norm(v);
        if (n < 1e-8) continue;  // retry on a degenerate draw
        for (auto& x : v) x /= n;
        basis.push_back(std::move(v));
    }
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) q.at(r, c) = basis[static_cast<size_t>(c)][static_cast<size_t>(r)];
    return q;
}

}  // namespace vistaloop
