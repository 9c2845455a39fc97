#include "ddsr/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "ddsr/extract.hpp"

namespace ddsr {

namespace {

void check_nonzero_symbols(const CVec& s) {
    for (Index j = 0; j < s.size(); ++j) {
        if (s[j] == cplx(0.0, 0.0)) {
            throw DomainError("S_tilde has a zero diagonal entry at index " + std::to_string(j));
        }
    }
}

double real_inner(const CVec& x, const CVec& y) { return y.dot(x).real(); }

// [T(U), z; z^H, t]
void assemble_lift(const ToeplitzParam& U, const CVec& z, double t, int M, int N, CMat& X) {
    const Index n = z.size();
    X.resize(n + 1, n + 1);
    X.topLeftCorner(n, n) = block_toeplitz(U, M, N);
    X.topRightCorner(n, 1) = z;
    X.bottomLeftCorner(1, n) = z.adjoint();
    X(n, n) = t;
}

} // namespace

void SolverConfig::validate() const {
    if (!(lambda > 0.0)) throw ConfigError("solver: lambda must be > 0");
    if (!(mu >= 0.0)) throw ConfigError("solver: mu must be >= 0");
    if (!(rho > 0.0)) throw ConfigError("solver: rho must be > 0");
    if (max_iters < 1) throw ConfigError("solver: max_iters must be >= 1");
    if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw ConfigError("solver: tolerances must be > 0");
}

SolverConfig SolverConfig::defaults_for(int M, int N, double sigma, bool with_l1) {
    const double mn = static_cast<double>(M) * N;
    SolverConfig c;
    c.lambda = sigma * std::sqrt(mn * std::log(mn));
    c.mu = with_l1 ? c.lambda / std::sqrt(mn) : 0.0;
    c.rho = 0.05;
    return c;
}

double objective_primal(const SolverState& state, const Measurement& measurement,
                        const SolverConfig& config) {
    const CVec s = measurement.s_tilde();
    const CVec w = measurement.r_bar - state.e_bar - s.cwiseProduct(state.z_bar);
    const int M = measurement.config.M;
    const int N = measurement.config.N;
    // Tr T(U) = MN u_0(0)
    const double trace = static_cast<double>(M) * N * state.U(0, 0).real();
    return 0.5 * w.squaredNorm() + config.lambda / (2.0 * M * N) * trace + 0.5 * config.lambda * state.t +
           config.mu * state.e_bar.cwiseAbs().sum();
}

double objective_dual(const CVec& nu, const Measurement& measurement, const SolverConfig&) {
    const CVec s = measurement.s_tilde();
    check_nonzero_symbols(s);
    if (nu.size() != s.size()) {
        throw DomainError("objective_dual: nu must have length MN");
    }
    const CVec w = nu.cwiseQuotient(s.conjugate());
    return real_inner(w, measurement.r_bar) - 0.5 * w.squaredNorm();
}

Solution solve(const Measurement& measurement, const SolverConfig& config) {
    config.validate();
    measurement.validate();
    const auto started = std::chrono::steady_clock::now();

    const int M = measurement.config.M;
    const int N = measurement.config.N;
    const Index n = static_cast<Index>(M) * N;
    const CVec s = measurement.s_tilde();
    check_nonzero_symbols(s);
    const CVec& r = measurement.r_bar;
    const double rho = config.rho;
    const double lambda = config.lambda;
    const bool with_l1 = config.mu > 0.0;

    const CVec s_conj = s.conjugate();
    const CVec s_conj_r = s_conj.cwiseProduct(r);
    const RVec z_scale = (s.cwiseAbs2().array() + 2.0 * rho).inverse().matrix();

    SolverState st;
    st.z_bar = CVec::Zero(n);
    st.e_bar = CVec::Zero(n);
    st.U = ToeplitzParam(M, N);
    st.t = 0.0;
    st.Theta = CMat::Zero(n + 1, n + 1);
    st.Upsilon = CMat::Zero(n + 1, n + 1);

    SolverDiagnostics diag;
    PsdProjector projector;
    CMat X;
    CMat theta_prev;
    const double stop_primal = config.tol_primal * static_cast<double>(n + 1);
    const double stop_dual = config.tol_dual * static_cast<double>(n + 1);

    for (int it = 1; it <= config.max_iters; ++it) {
        const CVec theta1 = st.Theta.topRightCorner(n, 1);
        const CVec ups1 = st.Upsilon.topRightCorner(n, 1);

        // z: (S^H S + 2 rho I)^{-1} (S^H r - S^H e + 2 rho theta1 + 2 ups1)
        st.z_bar = (s_conj_r - s_conj.cwiseProduct(st.e_bar) + 2.0 * rho * theta1 + 2.0 * ups1)
                       .cwiseProduct(z_scale);

        st.t = st.Theta(n, n).real() + (st.Upsilon(n, n).real() - 0.5 * lambda) / rho;

        st.U = adjoint_normalized(st.Theta.topLeftCorner(n, n) + st.Upsilon.topLeftCorner(n, n) / rho, M, N);
        st.U(0, 0) -= lambda / (2.0 * static_cast<double>(n) * rho);
        st.U.hermitize();

        if (with_l1) {
            st.e_bar = soft_threshold(r - s.cwiseProduct(st.z_bar), config.mu);
        }

        assemble_lift(st.U, st.z_bar, st.t, M, N, X);
        theta_prev.swap(st.Theta);
        st.Theta = projector.project(X - st.Upsilon / rho);
        st.Upsilon += rho * (st.Theta - X);
        st.iter = it;

        const double primal = (st.Theta - X).norm();
        const double dual = rho * (st.Theta - theta_prev).norm();
        if (!std::isfinite(primal) || !std::isfinite(dual) || !st.z_bar.allFinite()) {
            std::ostringstream os;
            os << "ADMM produced non-finite values at iteration " << it;
            throw NumericError(os.str());
        }
        diag.final_primal_residual = primal;
        diag.final_dual_residual = dual;
        diag.iterations = it;
        if (config.record_history) {
            diag.history.push_back({primal, dual, objective_primal(st, measurement, config)});
        }
        if (primal < stop_primal && dual < stop_dual) {
            diag.converged = true;
            break;
        }
    }

    Solution sol;
    sol.z_hat = st.z_bar;
    sol.e_hat = st.e_bar;
    // Stationarity in z gives S^H (S z + e - r) = 2 upsilon_1, so the dual
    // vector S^H (r - S z - e) is -2 upsilon_1.
    sol.nu_hat = -2.0 * CVec(st.Upsilon.topRightCorner(n, 1));
    diag.final_objective = objective_primal(st, measurement, config);
    diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    sol.state = std::move(st);
    sol.diagnostics = std::move(diag);
    return sol;
}

double dual_atomic_norm(const CVec& nu, int M, int N, const DualNormOptions& options) {
    const int gp = options.oversample * M;
    const int gq = options.oversample * N;
    const RMat grid = dual_polynomial_grid(nu, M, N, gp, gq);
    Index bi = 0;
    Index bj = 0;
    double best = grid.maxCoeff(&bi, &bj);
    if (!options.refine || best == 0.0) {
        return best;
    }
    double phi = static_cast<double>(bi) / gp;
    double psi = static_cast<double>(bj) / gq;
    refine_peak(nu, M, N, phi, psi, 1e-10, 50, 1.0 / std::min(gp, gq));
    return std::max(best, std::abs(dual_polynomial(nu, phi, psi, M, N)));
}

double OptimalityReport::worst() const {
    double w = std::max(atomic_complementarity, std::max(0.0, dual_atomic_excess));
    if (l1_applicable) {
        w = std::max({w, l1_complementarity, std::max(0.0, linf_excess)});
    }
    return w;
}

OptimalityReport optimality_residuals(const Solution& solution, const Measurement& measurement,
                                      const SolverConfig& config, double tolerance) {
    const int M = measurement.config.M;
    const int N = measurement.config.N;
    const CVec s = measurement.s_tilde();
    const CVec sz = s.cwiseProduct(solution.z_hat);
    const CVec w = measurement.r_bar - solution.e_hat - sz;

    OptimalityReport rep;
    const double atomic_surrogate = 0.5 * solution.state.U(0, 0).real() + 0.5 * solution.state.t;
    rep.atomic_complementarity = std::abs(config.lambda * atomic_surrogate - real_inner(w, sz));
    rep.dual_atomic_excess = dual_atomic_norm(s.conjugate().cwiseProduct(w), M, N) - config.lambda;
    rep.l1_applicable = config.mu > 0.0;
    if (rep.l1_applicable) {
        rep.l1_complementarity =
            std::abs(config.mu * solution.e_hat.cwiseAbs().sum() - real_inner(w, solution.e_hat));
        rep.linf_excess = w.cwiseAbs().maxCoeff() - config.mu;
    }
    rep.tolerance = tolerance > 0.0 ? tolerance : 1e-3 * std::max({config.lambda, config.mu, 1.0});
    rep.optimal = rep.worst() < rep.tolerance;
    return rep;
}

double estimate_sigma(const Measurement& measurement) {
    const int M = measurement.config.M;
    const int N = measurement.config.N;
    const CVec s = measurement.s_tilde();
    const CVec normalized = measurement.r_bar.cwiseQuotient(s);
    const Eigen::Map<const CMat> R(normalized.data(), M, N);
    CMat Fm(M, M);
    CMat Fn(N, N);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) Fm(a, b) = std::polar(1.0, -kTwoPi * a * b / M);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) Fn(a, b) = std::polar(1.0, -kTwoPi * a * b / N);
    const CMat spectrum = Fm * R * Fn;
    std::vector<double> mags(static_cast<std::size_t>(spectrum.size()));
    for (Index j = 0; j < spectrum.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(spectrum.data()[j]);
    auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
    std::nth_element(mags.begin(), mid, mags.end());
    // Noise-only bins are Rayleigh with median sigma sqrt(MN ln 2).
    return *mid / std::sqrt(static_cast<double>(M) * N * std::log(2.0));
}

} // namespace ddsr
