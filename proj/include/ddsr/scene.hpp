#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ddsr/types.hpp"

namespace ddsr {

/// OFDM and radar parameters. Construct through RadarConfig::create, which
/// derives the block duration and checks delta_f * T == 1.
struct RadarConfig {
    int M = 0;                   // OFDM blocks
    int N = 0;                   // subcarriers
    double delta_f = 0.0;        // Hz
    double T = 0.0;              // s
    double T_cp = 0.0;           // s
    double T_bar = 0.0;          // s, T + T_cp
    double f_c = 0.0;            // Hz
    double noise_power_db = 0.0; // per-sample noise power

    static RadarConfig create(int M, int N, double delta_f, double T, double T_cp,
                              double f_c, double noise_power_db);

    void validate() const;

    [[nodiscard]] int size() const { return M * N; }
    [[nodiscard]] double sigma2() const;
};

/// One scatterer in normalized coordinates: phi = f_d * T_bar, psi = delta_f * tau.
struct Path {
    cplx alpha{0.0, 0.0};
    double phi = 0.0;
    double psi = 0.0;
};

struct Scene {
    std::vector<Path> targets;
    std::vector<Path> clutter;

    [[nodiscard]] std::size_t size() const { return targets.size() + clutter.size(); }
    [[nodiscard]] std::vector<Path> all_paths() const;
    void validate() const;
};

/// Unit-modulus PSK alphabet. points[label] is the symbol for the Gray bit
/// label `label`, so flipping one bit of a label moves to an adjacent point.
struct Constellation {
    std::string name;
    std::vector<cplx> points;
    int bits_per_symbol = 0;

    static Constellation bpsk();
    static Constellation qpsk();
    static Constellation from_name(const std::string& name);

    [[nodiscard]] int nearest_label(cplx symbol) const;
    [[nodiscard]] int flip_bit(int label, int bit) const { return label ^ (1 << bit); }
};

using Rng = std::mt19937_64;

/// Splitmix64-style mixing so per-stream seeds are decorrelated.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

CVec steering_b(double phi, int M);
CVec steering_g(double psi, int N);

/// a(phi, psi) = conj(g(psi)) kron b(phi); entry n*M + m is exp(i 2pi (m phi - n psi)).
CVec atom(double phi, double psi, int M, int N);

/// Noise-free signal z = sum_k alpha_k a(phi_k, psi_k), column-major vec(Z).
CVec synthesize_clean(const Scene& scene, const RadarConfig& config);

CMat generate_symbols(const RadarConfig& config, const Constellation& constellation,
                      std::uint64_t seed);

struct DemodErrors {
    CMat S_hat;
    std::vector<Index> error_mask; // column-major indices where S_hat != S, ascending
};

DemodErrors inject_demod_errors(const CMat& S, double ber, const Constellation& constellation,
                                std::uint64_t seed);

struct SimMetadata {
    std::uint64_t seed = 0;
    double ber = 0.0;
    std::string constellation;
};

struct Measurement {
    RadarConfig config;
    CMat S_hat;                    // M x N demodulated symbols
    CVec r_bar;                    // vec(R)
    std::optional<CVec> z_bar_true;
    std::optional<CVec> e_bar_true;
    std::optional<CVec> v_bar_true;
    double sigma2 = 0.0;           // linear noise variance, <= 0 when unknown
    std::optional<Scene> truth;
    std::vector<Index> error_mask;
    std::optional<SimMetadata> metadata;

    /// Diagonal of S_tilde = diag(vec(S_hat)).
    [[nodiscard]] CVec s_tilde() const;
    void validate() const;
};

Measurement measure(const Scene& scene, const CMat& S, const CMat& S_hat,
                    const RadarConfig& config, std::uint64_t seed);

/// Convenience: symbols, demodulation errors and noise from one base seed.
Measurement simulate(const Scene& scene, const RadarConfig& config,
                     const Constellation& constellation, double ber, std::uint64_t seed);

struct NormalizedFreq {
    double phi = 0.0;
    double psi = 0.0;
};

struct PhysicalCoord {
    double range_m = 0.0;
    double velocity_mps = 0.0;
};

NormalizedFreq physical_to_normalized(double range_m, double velocity_mps,
                                      const RadarConfig& config);

/// phi > 0.5 maps to negative Doppler.
PhysicalCoord normalized_to_physical(double phi, double psi, const RadarConfig& config);

} // namespace ddsr
