#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ddsr/admm.hpp"
#include "ddsr/scene.hpp"

namespace ddsr {

struct EstimatedPath {
    double phi = 0.0;
    double psi = 0.0;
    cplx alpha{0.0, 0.0};
    double dual_peak = 0.0; // |Q| at the path, 0 when not certificate-based
};

struct Estimate {
    std::string algorithm;
    std::vector<EstimatedPath> paths; // sorted by |alpha| descending
    std::vector<Index> error_support;
    std::vector<Index> dual_confirmed_errors;
    bool error_support_applicable = false;

    void sort_paths();
};

/// Q(phi, psi) = <nu, a(phi, psi)> = sum_j nu_j conj(a_j(phi, psi)).
cplx dual_polynomial(const CVec& nu, double phi, double psi, int M, int N);

/// |Q| sampled on grid_phi x grid_psi points {i/grid_phi} x {j/grid_psi}.
RMat dual_polynomial_grid(const CVec& nu, int M, int N, int grid_phi, int grid_psi);

/// Q with first and second partial derivatives in (phi, psi).
struct DualPolyDerivatives {
    cplx q, q_phi, q_psi, q_phiphi, q_psipsi, q_phipsi;
};
DualPolyDerivatives dual_polynomial_derivatives(const CVec& nu, double phi, double psi, int M, int N);

/// Newton ascent on |Q|^2 from (phi, psi). Returns false if it did not
/// converge, in which case (phi, psi) is left unchanged.
bool refine_peak(const CVec& nu, int M, int N, double& phi, double& psi, double grad_tol = 1e-8,
                 int max_steps = 50, double max_move = 0.5);

/// Cells of a periodic grid that dominate their 8 neighbours (ties go to the
/// lexicographically first cell) and reach `threshold`, as (row, col) pairs.
std::vector<std::pair<int, int>> grid_local_maxima(const RMat& grid, double threshold);

struct PeakOptions {
    int oversample = 16;
    double epsilon = 0.02;
    double grad_tol = 1e-8;
    int max_newton = 50;
};

struct Peak {
    double phi = 0.0;
    double psi = 0.0;
    double magnitude = 0.0;
};

/// Certificate peaks: local maxima of |Q| with |Q| >= (1 - eps) lambda,
/// refined off-grid and deduplicated within (1/(2M), 1/(2N)).
std::vector<Peak> locate_peaks(const CVec& nu, double lambda, int M, int N,
                               const PeakOptions& options = {});

struct ErrorSupportOptions {
    double threshold_e = -1.0; // absolute; negative means 1e-6 * |r|_inf
    double dual_rel_tol = 0.05;
};

struct ErrorSupport {
    bool applicable = false;
    std::vector<Index> indices;        // |e_j| > threshold_e
    std::vector<Index> dual_confirmed; // ||nu_j / conj(s_j)| - mu| <= tol * mu
};

ErrorSupport detect_error_support(const CVec& nu, const CVec& e_hat, const CVec& s_tilde, double mu,
                                  double r_inf_norm, const ErrorSupportOptions& options = {});

/// argmin_alpha |r - S C alpha - e|_2 with C = [a(phi_k, psi_k)].
CVec ls_amplitudes(const CVec& r_bar, const CVec& s_tilde, const CVec& e_hat,
                   const std::vector<NormalizedFreq>& freqs, int M, int N);

struct PhysicalPath {
    double range_m = 0.0;
    double velocity_mps = 0.0;
    cplx amplitude{0.0, 0.0};
};

std::vector<PhysicalPath> to_physical(const Estimate& estimate, const RadarConfig& config);

/// Full atomic-norm receiver: solve, certificate peaks, LS amplitudes and
/// error support. The solver output is written to `solution` when non-null.
Estimate estimate_atomic(const Measurement& measurement, const SolverConfig& config,
                         const PeakOptions& peaks = {}, Solution* solution = nullptr);

} // namespace ddsr
