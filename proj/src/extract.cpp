#include "ddsr/extract.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ddsr {

namespace {

// Columns exp(i 2 pi idx f_c) for f_c = c / count.
CMat grid_steering(int len, int count) {
    CMat B(len, count);
    for (int c = 0; c < count; ++c) {
        for (int i = 0; i < len; ++i) {
            B(i, c) = std::polar(1.0, kTwoPi * static_cast<double>((static_cast<long long>(i) * c) % count) / count);
        }
    }
    return B;
}

double mag2(cplx z) { return std::norm(z); }

} // namespace

void Estimate::sort_paths() {
    std::stable_sort(paths.begin(), paths.end(),
                     [](const EstimatedPath& a, const EstimatedPath& b) { return std::abs(a.alpha) > std::abs(b.alpha); });
}

cplx dual_polynomial(const CVec& nu, double phi, double psi, int M, int N) {
    cplx acc(0.0, 0.0);
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < M; ++m) {
            acc += nu[static_cast<Index>(n) * M + m] * std::polar(1.0, -kTwoPi * (m * phi - n * psi));
        }
    }
    return acc;
}

RMat dual_polynomial_grid(const CVec& nu, int M, int N, int grid_phi, int grid_psi) {
    if (nu.size() != static_cast<Index>(M) * N) {
        throw DomainError("dual_polynomial_grid: nu must have length MN");
    }
    const Eigen::Map<const CMat> V(nu.data(), M, N);
    const CMat B = grid_steering(M, grid_phi);
    const CMat G = grid_steering(N, grid_psi);
    const CMat Q = B.adjoint() * V * G;
    return Q.cwiseAbs();
}

DualPolyDerivatives dual_polynomial_derivatives(const CVec& nu, double phi, double psi, int M, int N) {
    DualPolyDerivatives d{};
    for (int n = 0; n < N; ++n) {
        const double wn = kTwoPi * n;
        for (int m = 0; m < M; ++m) {
            const double wm = kTwoPi * m;
            const cplx term = nu[static_cast<Index>(n) * M + m] * std::polar(1.0, -kTwoPi * (m * phi - n * psi));
            d.q += term;
            d.q_phi += cplx(0.0, -wm) * term;
            d.q_psi += cplx(0.0, wn) * term;
            d.q_phiphi += -wm * wm * term;
            d.q_psipsi += -wn * wn * term;
            d.q_phipsi += wm * wn * term;
        }
    }
    return d;
}

bool refine_peak(const CVec& nu, int M, int N, double& phi, double& psi, double grad_tol, int max_steps,
                 double max_move) {
    double p = phi;
    double q = psi;
    const double step_cap = 0.25 / std::max(M, N);
    bool converged = false;
    for (int step = 0; step < max_steps; ++step) {
        const auto d = dual_polynomial_derivatives(nu, p, q, M, N);
        const double f = mag2(d.q);
        const Eigen::Vector2d g(2.0 * (std::conj(d.q) * d.q_phi).real(), 2.0 * (std::conj(d.q) * d.q_psi).real());
        if (g.norm() <= grad_tol * std::max(1.0, f)) {
            converged = true;
            break;
        }
        Eigen::Matrix2d H;
        H(0, 0) = 2.0 * (mag2(d.q_phi) + (std::conj(d.q) * d.q_phiphi).real());
        H(1, 1) = 2.0 * (mag2(d.q_psi) + (std::conj(d.q) * d.q_psipsi).real());
        H(0, 1) = H(1, 0) = 2.0 * ((std::conj(d.q_phi) * d.q_psi).real() + (std::conj(d.q) * d.q_phipsi).real());

        Eigen::Vector2d dir;
        if (H(0, 0) < 0.0 && H.determinant() > 0.0) {
            dir = -H.ldlt().solve(g);
        } else {
            dir = g * (step_cap / g.norm());
        }
        if (dir.norm() > step_cap) {
            dir *= step_cap / dir.norm();
        }
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving) {
            const double f_new = mag2(dual_polynomial(nu, wrap_unit(p + dir[0]), wrap_unit(q + dir[1]), M, N));
            if (f_new >= f) {
                accepted = true;
                break;
            }
            dir *= 0.5;
        }
        if (!accepted) {
            // No ascent direction left at working precision.
            converged = g.norm() <= 1e-6 * std::max(1.0, f);
            break;
        }
        p += dir[0];
        q += dir[1];
        if (dir.norm() < 1e-15) {
            converged = true;
            break;
        }
    }
    if (!converged || std::hypot(p - phi, q - psi) > max_move) {
        return false;
    }
    phi = wrap_unit(p);
    psi = wrap_unit(q);
    return true;
}

std::vector<std::pair<int, int>> grid_local_maxima(const RMat& grid, double threshold) {
    const int gp = static_cast<int>(grid.rows());
    const int gq = static_cast<int>(grid.cols());
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < gp; ++i) {
        for (int j = 0; j < gq; ++j) {
            const double v = grid(i, j);
            if (v < threshold) continue;
            bool is_max = true;
            for (int di = -1; di <= 1 && is_max; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    const int ni = (i + di + gp) % gp;
                    const int nj = (j + dj + gq) % gq;
                    if (ni == i && nj == j) continue;
                    const double nv = grid(ni, nj);
                    const bool earlier = ni < i || (ni == i && nj < j);
                    if (earlier ? nv >= v : nv > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) out.emplace_back(i, j);
        }
    }
    return out;
}

std::vector<Peak> locate_peaks(const CVec& nu, double lambda, int M, int N, const PeakOptions& options) {
    if (!(lambda > 0.0)) {
        throw DomainError("locate_peaks: lambda must be > 0");
    }
    const int gp = options.oversample * M;
    const int gq = options.oversample * N;
    const RMat G = dual_polynomial_grid(nu, M, N, gp, gq);
    const double threshold = (1.0 - options.epsilon) * lambda;

    std::vector<Peak> candidates;
    for (const auto& [i, j] : grid_local_maxima(G, threshold)) {
        const double v = G(i, j);
        Peak pk{static_cast<double>(i) / gp, static_cast<double>(j) / gq, v};
        double phi = pk.phi;
        double psi = pk.psi;
        const double cell = 1.5 * std::max(1.0 / gp, 1.0 / gq);
        if (refine_peak(nu, M, N, phi, psi, options.grad_tol, options.max_newton, cell)) {
            const double refined = std::abs(dual_polynomial(nu, phi, psi, M, N));
            if (refined >= v) {
                pk = {phi, psi, refined};
            }
        }
        candidates.push_back(pk);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
    std::vector<Peak> out;
    for (const auto& c : candidates) {
        const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Peak& o) {
            return wrap_distance(o.phi, c.phi) < 0.5 / M && wrap_distance(o.psi, c.psi) < 0.5 / N;
        });
        if (!duplicate) out.push_back(c);
    }
    return out;
}

ErrorSupport detect_error_support(const CVec& nu, const CVec& e_hat, const CVec& s_tilde, double mu,
                                  double r_inf_norm, const ErrorSupportOptions& options) {
    ErrorSupport out;
    if (!(mu > 0.0)) {
        return out;
    }
    out.applicable = true;
    const double thr = options.threshold_e >= 0.0 ? options.threshold_e : 1e-6 * r_inf_norm;
    for (Index j = 0; j < e_hat.size(); ++j) {
        if (std::abs(e_hat[j]) > thr) out.indices.push_back(j);
        const double mag = std::abs(nu[j]) / std::abs(s_tilde[j]);
        if (std::abs(mag - mu) <= options.dual_rel_tol * mu) out.dual_confirmed.push_back(j);
    }
    return out;
}

CVec ls_amplitudes(const CVec& r_bar, const CVec& s_tilde, const CVec& e_hat,
                   const std::vector<NormalizedFreq>& freqs, int M, int N) {
    const Index n = static_cast<Index>(M) * N;
    if (freqs.empty()) {
        throw DomainError("ls_amplitudes: empty frequency list");
    }
    if (static_cast<Index>(freqs.size()) > n) {
        throw DegenerateInputError("ls_amplitudes: more frequencies than samples");
    }
    CMat D(n, static_cast<Index>(freqs.size()));
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        D.col(static_cast<Index>(k)) = s_tilde.cwiseProduct(atom(freqs[k].phi, freqs[k].psi, M, N));
    }
    Eigen::JacobiSVD<CMat> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVec& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    if (!(smin > 0.0) || sv[0] / smin > 1e10) {
        std::ostringstream os;
        os << "ls_amplitudes: rank-deficient dictionary (condition " << (smin > 0.0 ? sv[0] / smin : INFINITY)
           << "); offending pairs:";
        bool listed = false;
        for (std::size_t a = 0; a < freqs.size(); ++a) {
            for (std::size_t b = a + 1; b < freqs.size(); ++b) {
                const cplx c = D.col(static_cast<Index>(a)).dot(D.col(static_cast<Index>(b)));
                const double coh = std::abs(c) / (D.col(static_cast<Index>(a)).norm() * D.col(static_cast<Index>(b)).norm());
                if (coh > 1.0 - 1e-6) {
                    os << " (" << freqs[a].phi << "," << freqs[a].psi << ")~(" << freqs[b].phi << "," << freqs[b].psi << ")";
                    listed = true;
                }
            }
        }
        if (!listed) {
            for (const auto& f : freqs) os << " (" << f.phi << "," << f.psi << ")";
        }
        throw DegenerateInputError(os.str());
    }
    return svd.solve(r_bar - e_hat);
}

std::vector<PhysicalPath> to_physical(const Estimate& estimate, const RadarConfig& config) {
    std::vector<PhysicalPath> out;
    out.reserve(estimate.paths.size());
    for (const auto& p : estimate.paths) {
        const auto pc = normalized_to_physical(p.phi, p.psi, config);
        out.push_back({pc.range_m, pc.velocity_mps, p.alpha});
    }
    return out;
}

Estimate estimate_atomic(const Measurement& measurement, const SolverConfig& config, const PeakOptions& peaks,
                         Solution* solution) {
    Solution sol = solve(measurement, config);
    const int M = measurement.config.M;
    const int N = measurement.config.N;
    Estimate est;
    est.algorithm = config.mu > 0.0 ? "CS-ANL1" : "CS-AN";

    const auto found = locate_peaks(sol.nu_hat, config.lambda, M, N, peaks);
    if (!found.empty()) {
        std::vector<NormalizedFreq> freqs;
        for (const auto& p : found) freqs.push_back({p.phi, p.psi});
        const CVec s = measurement.s_tilde();
        const CVec alpha = ls_amplitudes(measurement.r_bar, s, sol.e_hat, freqs, M, N);
        for (std::size_t k = 0; k < found.size(); ++k) {
            est.paths.push_back({found[k].phi, found[k].psi, alpha[static_cast<Index>(k)], found[k].magnitude});
        }
    }
    const double r_inf = measurement.r_bar.cwiseAbs().maxCoeff();
    const auto support = detect_error_support(sol.nu_hat, sol.e_hat, measurement.s_tilde(), config.mu, r_inf);
    est.error_support_applicable = support.applicable;
    est.error_support = support.indices;
    est.dual_confirmed_errors = support.dual_confirmed;
    est.sort_paths();
    if (solution != nullptr) {
        *solution = std::move(sol);
    }
    return est;
}

} // namespace ddsr
