#include "ddsr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ddsr {

namespace {

CMat phase_grid(int len, int count) {
    CMat B(len, count);
    for (int c = 0; c < count; ++c) {
        for (int i = 0; i < len; ++i) {
            const long long k = (static_cast<long long>(i) * c) % count;
            B(i, c) = std::polar(1.0, kTwoPi * static_cast<double>(k) / count);
        }
    }
    return B;
}

} // namespace

void MusicConfig::validate(int M, int N) const {
    if (M_sub < 1 || M_sub >= M || N_sub < 1 || N_sub >= N) {
        throw ConfigError("MUSIC: subarray sizes must satisfy 1 <= M' < M and 1 <= N' < N");
    }
    if (K_signal != kAutoSignalDim && (K_signal < 1 || K_signal >= M_sub * N_sub)) {
        throw ConfigError("MUSIC: signal dimension must lie in [1, M'N')");
    }
    if (grid_phi < 1 || grid_psi < 1) {
        throw ConfigError("MUSIC: spectrum grid sizes must be positive");
    }
}

MusicConfig MusicConfig::defaults_for(int M, int N, int K_signal) {
    MusicConfig c;
    c.M_sub = std::max(1, M / 2);
    c.N_sub = std::max(1, N / 2);
    c.K_signal = K_signal;
    c.grid_phi = 16 * M;
    c.grid_psi = 16 * N;
    return c;
}

void CsL1Config::validate(int M, int N) const {
    if (M_grid < M || N_grid < N) {
        throw ConfigError("CS-L1: grid sizes must satisfy M_grid >= M and N_grid >= N");
    }
    if (!(gamma >= 0.0)) throw ConfigError("CS-L1: gamma must be >= 0");
    if (max_iters < 1 || !(tol > 0.0)) throw ConfigError("CS-L1: max_iters >= 1 and tol > 0 required");
}

CsL1Config CsL1Config::defaults_for(int M, int N, double sigma) {
    CsL1Config c;
    c.M_grid = 4 * M;
    c.N_grid = 4 * N;
    c.gamma = 2.0 * sigma * std::sqrt(2.0 * std::log(static_cast<double>(c.M_grid) * c.N_grid));
    return c;
}

CMat spatial_smooth(const Measurement& measurement, const MusicConfig& config) {
    const int M = measurement.config.M;
    const int N = measurement.config.N;
    config.validate(M, N);
    const CVec s = measurement.s_tilde();
    for (Index j = 0; j < s.size(); ++j) {
        if (s[j] == cplx(0.0, 0.0)) throw DomainError("spatial_smooth: zero symbol at index " + std::to_string(j));
    }
    const CVec normalized = measurement.r_bar.cwiseQuotient(s);
    const Eigen::Map<const CMat> R(normalized.data(), M, N);
    const int Ms = config.M_sub;
    const int Ns = config.N_sub;
    const int n_anchor = N - Ns + 1;
    const int m_anchor = M - Ms + 1;
    CMat Y(static_cast<Index>(Ms) * Ns, static_cast<Index>(m_anchor) * n_anchor);
    for (int m0 = 0; m0 < m_anchor; ++m0) {
        for (int n0 = 0; n0 < n_anchor; ++n0) {
            const Index col = static_cast<Index>(m0) * n_anchor + n0;
            for (int nn = 0; nn < Ns; ++nn) {
                for (int mm = 0; mm < Ms; ++mm) {
                    Y(static_cast<Index>(nn) * Ms + mm, col) = R(m0 + mm, n0 + nn);
                }
            }
        }
    }
    return Y;
}

int eigen_gap_dimension(const RVec& sv) {
    const Index limit = std::max<Index>(1, std::min<Index>(sv.size() - 1, sv.size() / 2));
    int best = 1;
    double best_ratio = -1.0;
    for (Index i = 0; i < limit; ++i) {
        const double denom = std::max(sv[i + 1], std::numeric_limits<double>::min());
        const double ratio = sv[i] / denom;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = static_cast<int>(i + 1);
        }
    }
    return best;
}

RMat music_spectrum(const CMat& observation, const MusicConfig& config, int signal_dim) {
    const int Ms = config.M_sub;
    const int Ns = config.N_sub;
    if (observation.rows() != static_cast<Index>(Ms) * Ns) {
        throw ConfigError("music_spectrum: observation rows must equal M'N'");
    }
    if (signal_dim < 1 || signal_dim >= Ms * Ns) {
        throw ConfigError("music_spectrum: signal dimension must lie in [1, M'N')");
    }
    Eigen::BDCSVD<CMat> svd(observation, Eigen::ComputeFullU);
    if (svd.info() != Eigen::Success) {
        throw NumericError("music_spectrum: SVD failed");
    }
    const CMat& F = svd.matrixU();
    const CMat Bg = phase_grid(Ms, config.grid_phi);
    const CMat Gg_conj = phase_grid(Ns, config.grid_psi).conjugate();
    RMat signal_power = RMat::Zero(config.grid_phi, config.grid_psi);
    for (int k = 0; k < signal_dim; ++k) {
        const Eigen::Map<const CMat> W(F.col(k).data(), Ms, Ns);
        // F_k^H a'(phi, psi) = sum conj(W(m,n)) exp(i 2pi (m phi - n psi))
        const CMat proj = Bg.transpose() * W.conjugate() * Gg_conj;
        signal_power += proj.cwiseAbs2();
    }
    const double norm_a = static_cast<double>(Ms) * Ns;
    const double floor = norm_a * 1e-15;
    return (norm_a - signal_power.array()).max(floor).inverse().matrix();
}

RMat music_spectrum(const CMat& observation, const MusicConfig& config) {
    int dim = config.K_signal;
    if (dim == MusicConfig::kAutoSignalDim) {
        Eigen::BDCSVD<CMat> svd(observation);
        dim = eigen_gap_dimension(svd.singularValues());
    }
    return music_spectrum(observation, config, dim);
}

Estimate music_estimate(const Measurement& measurement, const MusicConfig& config) {
    const int M = measurement.config.M;
    const int N = measurement.config.N;
    const CMat Y = spatial_smooth(measurement, config);
    int dim = config.K_signal;
    if (dim == MusicConfig::kAutoSignalDim) {
        Eigen::BDCSVD<CMat> svd(Y);
        dim = eigen_gap_dimension(svd.singularValues());
    }
    const RMat spectrum = music_spectrum(Y, config, dim);
    auto maxima = grid_local_maxima(spectrum, 0.0);
    std::stable_sort(maxima.begin(), maxima.end(), [&](const auto& a, const auto& b) {
        return spectrum(a.first, a.second) > spectrum(b.first, b.second);
    });
    if (static_cast<int>(maxima.size()) > dim) maxima.resize(static_cast<std::size_t>(dim));

    Estimate est;
    est.algorithm = "2D-MUSIC";
    if (maxima.empty()) return est;
    std::vector<NormalizedFreq> freqs;
    for (const auto& [i, j] : maxima) {
        freqs.push_back({static_cast<double>(i) / config.grid_phi, static_cast<double>(j) / config.grid_psi});
    }
    const CVec alpha = ls_amplitudes(measurement.r_bar, measurement.s_tilde(), CVec::Zero(measurement.r_bar.size()),
                                     freqs, M, N);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        est.paths.push_back({freqs[k].phi, freqs[k].psi, alpha[static_cast<Index>(k)], 0.0});
    }
    est.sort_paths();
    return est;
}

GridDictionary::GridDictionary(const CVec& s_tilde, int M, int N, int M_grid, int N_grid)
    : s_(s_tilde), M_(M), N_(N), M_grid_(M_grid), N_grid_(N_grid),
      B_(phase_grid(M, M_grid)), G_(phase_grid(N, N_grid)) {
    if (s_.size() != static_cast<Index>(M) * N) {
        throw DomainError("GridDictionary: symbol vector must have length MN");
    }
}

CVec GridDictionary::apply(const CVec& x) const {
    const Eigen::Map<const CMat> X(x.data(), M_grid_, N_grid_);
    const CMat Z = B_ * X * G_.adjoint();
    return s_.cwiseProduct(Eigen::Map<const CVec>(Z.data(), Z.size()));
}

CVec GridDictionary::adjoint(const CVec& y) const {
    const CVec weighted = s_.conjugate().cwiseProduct(y);
    const Eigen::Map<const CMat> Y(weighted.data(), M_, N_);
    const CMat X = B_.adjoint() * Y * G_;
    return Eigen::Map<const CVec>(X.data(), X.size());
}

NormalizedFreq GridDictionary::frequency(Index column) const {
    return {static_cast<double>(column % M_grid_) / M_grid_, static_cast<double>(column / M_grid_) / N_grid_};
}

double GridDictionary::lipschitz() const {
    CVec v = CVec::Constant(columns(), cplx(1.0, 0.0));
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < 200; ++it) {
        CVec w = adjoint(apply(v));
        const double next = w.norm();
        if (next == 0.0) return 0.0;
        v = w / next;
        if (std::abs(next - est) <= 1e-12 * next) {
            est = next;
            break;
        }
        est = next;
    }
    return est;
}

CsL1Result csl1_solve(const Measurement& measurement, const CsL1Config& config) {
    const int M = measurement.config.M;
    const int N = measurement.config.N;
    config.validate(M, N);
    measurement.validate();
    const GridDictionary A(measurement.s_tilde(), M, N, config.M_grid, config.N_grid);
    const CVec& r = measurement.r_bar;

    CsL1Result res;
    // Power iteration approaches from below; pad so 1/L stays a valid step.
    res.lipschitz = A.lipschitz() * 1.01;
    const double L = res.lipschitz;
    const double gamma = config.gamma;
    auto objective = [&](const CVec& x) { return 0.5 * (r - A.apply(x)).squaredNorm() + gamma * x.cwiseAbs().sum(); };

    CVec x = CVec::Zero(A.columns());
    CVec y = x;
    double t = 1.0;
    double f_prev = objective(x);
    bool restarted = false;
    int it = 0;
    for (it = 1; it <= config.max_iters; ++it) {
        const CVec grad = A.adjoint(A.apply(y) - r);
        CVec x_new = soft_threshold(y - grad / L, gamma / L);
        const double f_new = objective(x_new);
        if (!std::isfinite(f_new)) {
            throw NumericError("CS-L1: non-finite objective at iteration " + std::to_string(it));
        }
        if (f_new > f_prev) {
            if (!restarted) {
                // Momentum overshoot: restart from the last accepted point.
                restarted = true;
                y = x;
                t = 1.0;
                continue;
            }
            // A plain proximal step from x cannot increase the objective
            // beyond rounding with a valid step size.
            if (f_new - f_prev > 1e-12 * std::max(f_prev, 1.0)) {
                throw NumericError("CS-L1: proximal step increased the objective at iteration " +
                                   std::to_string(it));
            }
            break;
        }
        restarted = false;
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x_new + ((t - 1.0) / t_new) * (x_new - x);
        x.swap(x_new);
        t = t_new;
        const double rel = std::abs(f_prev - f_new) / std::max(f_prev, std::numeric_limits<double>::min());
        f_prev = f_new;
        if (rel < config.tol) break;
    }
    res.iterations = std::min(it, config.max_iters);
    res.objective = f_prev;
    res.coefficients = x;

    Estimate est;
    est.algorithm = "CS-L1";
    const double peak = x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
    if (peak > 0.0) {
        for (Index i = 0; i < x.size(); ++i) {
            if (std::abs(x[i]) > 1e-3 * peak) {
                const auto f = A.frequency(i);
                est.paths.push_back({f.phi, f.psi, x[i], 0.0});
            }
        }
    }
    est.sort_paths();
    res.estimate = std::move(est);
    return res;
}

Estimate csl1_estimate(const Measurement& measurement, const CsL1Config& config) {
    return csl1_solve(measurement, config).estimate;
}

L1Certificate l1_certificate(const Measurement& measurement, const CsL1Config& config, const CVec& x) {
    const GridDictionary A(measurement.s_tilde(), measurement.config.M, measurement.config.N, config.M_grid,
                           config.N_grid);
    const CVec c = A.adjoint(measurement.r_bar - A.apply(x));
    L1Certificate cert;
    cert.max_correlation = c.cwiseAbs().maxCoeff();
    for (Index i = 0; i < x.size(); ++i) {
        if (x[i] != cplx(0.0, 0.0)) {
            const cplx sign = x[i] / std::abs(x[i]);
            cert.support_deviation = std::max(cert.support_deviation, std::abs(c[i] - config.gamma * sign));
        }
    }
    return cert;
}

} // namespace ddsr
