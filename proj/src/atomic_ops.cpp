#include "ddsr/atomic_ops.hpp"

#include <sstream>
#include <vector>

#include <lapacke.h>

namespace ddsr {

namespace {

lapack_complex_double* as_lapack(cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); }

[[noreturn]] void eig_failure(const char* routine, lapack_int info, const CMat& A) {
    std::ostringstream os;
    os << routine << " failed (info=" << info << ") on " << A.rows() << "x" << A.cols()
       << " matrix, |A|_F=" << A.norm() << ", finite=" << (A.allFinite() ? "yes" : "no");
    throw NumericError(os.str());
}

CMat hermitian_part(const CMat& A) {
    if (A.rows() != A.cols()) {
        throw DomainError("psd_project: matrix must be square");
    }
    if (!A.allFinite()) {
        throw NumericError("psd_project: non-finite input");
    }
    return (A + A.adjoint()) * 0.5;
}

// Eigenpairs of H with eigenvalues in (lo, hi]. H is overwritten.
lapack_int partial_eig(CMat& H, double lo, double hi, RVec& w, CMat& Z) {
    const lapack_int n = static_cast<lapack_int>(H.rows());
    w.resize(n);
    Z.resize(n, n);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, as_lapack(H.data()), n,
                                           lo, hi, 0, 0, 0.0, &found, w.data(), as_lapack(Z.data()), n,
                                           isuppz.data());
    if (info != 0) {
        return -1 - std::abs(info);
    }
    return found;
}

} // namespace

ToeplitzParam::ToeplitzParam(int M, int N)
    : M_(M), N_(N), U_(CMat::Zero(2 * M - 1, 2 * N - 1)) {
    if (M < 1 || N < 1) {
        throw DomainError("ToeplitzParam: M and N must be positive");
    }
}

ToeplitzParam ToeplitzParam::from_matrix(CMat U, int M, int N) {
    if (U.rows() != 2 * M - 1 || U.cols() != 2 * N - 1) {
        throw DomainError("ToeplitzParam: expected a (2M-1) x (2N-1) matrix");
    }
    ToeplitzParam p(M, N);
    p.U_ = std::move(U);
    return p;
}

void ToeplitzParam::hermitize() {
    const CMat flipped = U_.reverse().conjugate();
    U_ = (U_ + flipped) * 0.5;
}

bool ToeplitzParam::is_hermitian_consistent(double tol) const {
    return (U_ - U_.reverse().conjugate()).cwiseAbs().maxCoeff() <= tol;
}

CMat block_toeplitz(const ToeplitzParam& U, int M, int N) {
    if (U.M() != M || U.N() != N) {
        throw DomainError("block_toeplitz: parameter dimensions do not match (M, N)");
    }
    const Index n = static_cast<Index>(M) * N;
    CMat T(n, n);
    for (int j2 = 0; j2 < N; ++j2) {
        for (int b = 0; b < M; ++b) {
            const Index col = static_cast<Index>(j2) * M + b;
            for (int j1 = 0; j1 < N; ++j1) {
                for (int a = 0; a < M; ++a) {
                    T(static_cast<Index>(j1) * M + a, col) = U(j1 - j2, a - b);
                }
            }
        }
    }
    return T;
}

ToeplitzParam adjoint_normalized(const CMat& P, int M, int N) {
    const Index n = static_cast<Index>(M) * N;
    if (P.rows() != n || P.cols() != n) {
        throw DomainError("adjoint_normalized: P must be MN x MN");
    }
    ToeplitzParam Q(M, N);
    for (int j2 = 0; j2 < N; ++j2) {
        for (int b = 0; b < M; ++b) {
            const Index col = static_cast<Index>(j2) * M + b;
            for (int j1 = 0; j1 < N; ++j1) {
                for (int a = 0; a < M; ++a) {
                    Q(j1 - j2, a - b) += P(static_cast<Index>(j1) * M + a, col);
                }
            }
        }
    }
    for (int l = -N + 1; l < N; ++l) {
        for (int k = -M + 1; k < M; ++k) {
            Q(l, k) /= static_cast<double>((N - std::abs(l)) * (M - std::abs(k)));
        }
    }
    return Q;
}

CMat psd_project(const CMat& A) {
    CMat H = hermitian_part(A);
    const lapack_int n = static_cast<lapack_int>(H.rows());
    if (n == 0) {
        return H;
    }
    RVec w(n);
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, as_lapack(H.data()), n, w.data());
    if (info != 0) {
        eig_failure("zheevd", info, A);
    }
    const RVec clamped = w.cwiseMax(0.0);
    CMat X = H * clamped.asDiagonal() * H.adjoint();
    return (X + X.adjoint()) * 0.5;
}

CMat PsdProjector::project(const CMat& A) {
    CMat H = hermitian_part(A);
    const Index n = H.rows();
    if (n == 0) {
        return H;
    }
    const bool positive_side = positive_count_ < 0 || 2 * positive_count_ <= n;
    const double inf = std::numeric_limits<double>::infinity();
    CMat work = H;
    RVec w;
    CMat Z;
    lapack_int found = positive_side ? partial_eig(work, 0.0, inf, w, Z) : partial_eig(work, -inf, 0.0, w, Z);
    if (found < 0) {
        eig_failure("zheevr", -1 - found, A);
    }
    CMat X;
    if (positive_side) {
        positive_count_ = found;
        const auto V = Z.leftCols(found);
        X = V * w.head(found).asDiagonal() * V.adjoint();
    } else {
        positive_count_ = n - found;
        const auto V = Z.leftCols(found);
        X = H - V * w.head(found).asDiagonal() * V.adjoint();
    }
    return (X + X.adjoint()) * 0.5;
}

CVec soft_threshold(const CVec& v, double mu) {
    if (!(mu >= 0.0)) {
        throw DomainError("soft_threshold: mu must be non-negative");
    }
    CVec out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]);
        out[i] = mag > mu ? v[i] * ((mag - mu) / mag) : cplx(0.0, 0.0);
    }
    return out;
}

CMat SdpBlock::assemble() const {
    const Index n = theta0.rows();
    CMat full(n + 1, n + 1);
    full.topLeftCorner(n, n) = theta0;
    full.topRightCorner(n, 1) = theta1;
    full.bottomLeftCorner(1, n) = theta1.adjoint();
    full(n, n) = theta_bar;
    return full;
}

SdpBlock SdpBlock::split(const CMat& full) {
    const Index n = full.rows() - 1;
    SdpBlock b;
    b.theta0 = full.topLeftCorner(n, n);
    b.theta1 = full.topRightCorner(n, 1);
    b.theta_bar = full(n, n).real();
    return b;
}

} // namespace ddsr
