#pragma once

#include <optional>
#include <vector>

#include "ddsr/atomic_ops.hpp"
#include "ddsr/scene.hpp"

namespace ddsr {

/// Weights and stopping rule for the atomic-norm + l1 program
///   min 1/2 |r - e - S z|^2 + lambda |z|_A + mu |e|_1.
/// mu == 0 selects the atomic-norm-only receiver (e pinned to zero).
struct SolverConfig {
    double lambda = 1.0;
    double mu = 0.0;
    double rho = 0.05;
    int max_iters = 2000;
    double tol_primal = 1e-4;
    double tol_dual = 1e-4;
    bool record_history = true;

    void validate() const;

    /// lambda = sigma sqrt(MN log MN), mu = lambda / sqrt(MN), rho = 0.05.
    static SolverConfig defaults_for(int M, int N, double sigma, bool with_l1 = true);
};

struct SolverState {
    CVec z_bar;
    CVec e_bar;
    ToeplitzParam U;
    double t = 0.0;
    CMat Theta;   // (MN+1) x (MN+1), PSD after each projection
    CMat Upsilon; // multiplier for Theta = [T(U), z; z^H, t]
    int iter = 0;

    [[nodiscard]] SdpBlock theta_block() const { return SdpBlock::split(Theta); }
    [[nodiscard]] SdpBlock upsilon_block() const { return SdpBlock::split(Upsilon); }
};

struct IterationRecord {
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
};

struct SolverDiagnostics {
    std::vector<IterationRecord> history;
    double final_objective = 0.0;
    double final_primal_residual = 0.0;
    double final_dual_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    double seconds = 0.0;
};

struct Solution {
    CVec z_hat;
    CVec e_hat;
    CVec nu_hat; // dual vector, equals S^H (r - S z_hat - e_hat) at optimality
    SolverState state;
    SolverDiagnostics diagnostics;
};

/// ADMM on the SDP lift. Deterministic for identical inputs.
Solution solve(const Measurement& measurement, const SolverConfig& config);

/// 1/2 |r - e - S z|^2 + lambda/(2MN) Tr T(U) + lambda t / 2 + mu |e|_1.
double objective_primal(const SolverState& state, const Measurement& measurement,
                        const SolverConfig& config);

/// <(S^H)^{-1} nu, r>_R - 1/2 |(S^H)^{-1} nu|^2.
double objective_dual(const CVec& nu, const Measurement& measurement, const SolverConfig& config);

struct DualNormOptions {
    int oversample = 16;
    bool refine = true;
};

/// sup over atoms of |<nu, a(phi, psi)>|, evaluated on an oversampled grid
/// with local refinement of the best cell.
double dual_atomic_norm(const CVec& nu, int M, int N, const DualNormOptions& options = {});

/// Residuals of the four optimality conditions of the regularised problem.
struct OptimalityReport {
    double atomic_complementarity = 0.0; // |lambda |z|_A - <w, S z>_R|
    double l1_complementarity = 0.0;     // |mu |e|_1 - <w, e>_R|
    double dual_atomic_excess = 0.0;     // |S^H w|*_A - lambda
    double linf_excess = 0.0;            // |w|_inf - mu
    bool l1_applicable = true;           // false when mu == 0
    double tolerance = 0.0;
    bool optimal = false;

    [[nodiscard]] double worst() const;
};

OptimalityReport optimality_residuals(const Solution& solution, const Measurement& measurement,
                                      const SolverConfig& config, double tolerance = -1.0);

/// Noise level guess from the median DFT-bin magnitude of the symbol-normalised data.
double estimate_sigma(const Measurement& measurement);

} // namespace ddsr
