#pragma once

#include "ddsr/extract.hpp"
#include "ddsr/scene.hpp"

namespace ddsr {

/// 2D-MUSIC with spatial smoothing over M_sub x N_sub subarrays.
/// K_signal = kAutoSignalDim selects the signal dimension by the largest
/// singular-value gap; any other value must lie in [1, M'N').
struct MusicConfig {
    int M_sub = 0;
    int N_sub = 0;
    static constexpr int kAutoSignalDim = -1;
    int K_signal = kAutoSignalDim;
    int grid_phi = 0;
    int grid_psi = 0;

    void validate(int M, int N) const;
    /// M' = M/2, N' = N/2, 16x oversampled spectrum grid.
    static MusicConfig defaults_for(int M, int N, int K_signal);
};

/// l1-regularised least squares over a uniform M_grid x N_grid dictionary.
struct CsL1Config {
    int M_grid = 0;
    int N_grid = 0;
    double gamma = 0.0;
    int max_iters = 5000;
    double tol = 1e-12;

    void validate(int M, int N) const;
    /// 4x grids, gamma = 2 sigma sqrt(2 log L).
    static CsL1Config defaults_for(int M, int N, double sigma);
};

/// M'N' x N_snap matrix of vectorised sub-blocks of R_m(n) = r_m(n) / s_hat_m(n).
/// Column index = m0 * (N - N' + 1) + n0 for the block anchored at (m0, n0).
CMat spatial_smooth(const Measurement& measurement, const MusicConfig& config);

/// Signal dimension from the largest ratio sigma_i / sigma_{i+1}, i <= M'N'/2.
int eigen_gap_dimension(const RVec& singular_values);

/// f(phi, psi) = 1 / |F_n^H a'(phi, psi)|^2 on a grid_phi x grid_psi grid.
RMat music_spectrum(const CMat& observation, const MusicConfig& config, int signal_dim);

/// Convenience overload resolving the signal dimension from the config.
RMat music_spectrum(const CMat& observation, const MusicConfig& config);

Estimate music_estimate(const Measurement& measurement, const MusicConfig& config);

/// Separable dictionary operator A = S_tilde C' with C' = conj(G') o B'.
/// Coefficient index j * M_grid + i corresponds to (i / M_grid, j / N_grid).
class GridDictionary {
public:
    GridDictionary(const CVec& s_tilde, int M, int N, int M_grid, int N_grid);

    [[nodiscard]] CVec apply(const CVec& x) const;
    [[nodiscard]] CVec adjoint(const CVec& y) const;
    [[nodiscard]] Index columns() const { return static_cast<Index>(M_grid_) * N_grid_; }
    [[nodiscard]] NormalizedFreq frequency(Index column) const;
    /// Largest eigenvalue of A^H A by power iteration.
    [[nodiscard]] double lipschitz() const;

private:
    CVec s_;
    int M_, N_, M_grid_, N_grid_;
    CMat B_; // M x M_grid
    CMat G_; // N x N_grid
};

struct CsL1Result {
    CVec coefficients;
    int iterations = 0;
    double objective = 0.0;
    double lipschitz = 0.0;
    Estimate estimate;
};

/// Accelerated proximal gradient with adaptive restart.
CsL1Result csl1_solve(const Measurement& measurement, const CsL1Config& config);
Estimate csl1_estimate(const Measurement& measurement, const CsL1Config& config);

/// max |A^H (r - A x)| overall and max deviation from gamma on the support.
struct L1Certificate {
    double max_correlation = 0.0;
    double support_deviation = 0.0;
};
L1Certificate l1_certificate(const Measurement& measurement, const CsL1Config& config, const CVec& x);

} // namespace ddsr
