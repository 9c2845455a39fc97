#pragma once

#include <limits>
#include <random>

#include "ddsr/scene.hpp"

namespace testing {

inline ddsr::RadarConfig config(int M, int N, double noise_db = -40.0) {
    return ddsr::RadarConfig::create(M, N, 5e3, 2e-4, 1e-4, 2e9, noise_db);
}

inline ddsr::CVec random_cvec(ddsr::Index n, ddsr::Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    ddsr::CVec v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v;
}

inline ddsr::CMat random_cmat(ddsr::Index r, ddsr::Index c, ddsr::Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ddsr::CMat A(r, c);
    for (ddsr::Index j = 0; j < c; ++j)
        for (ddsr::Index i = 0; i < r; ++i) A(i, j) = {g(rng), g(rng)};
    return A;
}

inline ddsr::CMat random_hermitian(ddsr::Index n, ddsr::Rng& rng) {
    const ddsr::CMat A = random_cmat(n, n, rng);
    return (A + A.adjoint()) / 2.0;
}

inline constexpr double kNoiseless = -std::numeric_limits<double>::infinity();

/// Noise-free, error-free measurement of `scene`.
inline ddsr::Measurement clean_measurement(const ddsr::Scene& scene, int M, int N, const ddsr::Constellation& c,
                                           std::uint64_t seed) {
    return ddsr::simulate(scene, config(M, N, kNoiseless), c, 0.0, seed);
}

} // namespace testing
