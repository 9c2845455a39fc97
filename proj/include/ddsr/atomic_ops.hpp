#pragma once

#include "ddsr/types.hpp"

namespace ddsr {

/// Parameter of the two-level Toeplitz lift, stored as a (2M-1) x (2N-1)
/// matrix. Column l + N - 1 holds u_l, row k + M - 1 holds u_l(k), for
/// l in [-N+1, N-1] and k in [-M+1, M-1].
class ToeplitzParam {
public:
    ToeplitzParam() = default;
    ToeplitzParam(int M, int N);

    /// Wraps a raw (2M-1) x (2N-1) matrix; throws DomainError on a size mismatch.
    static ToeplitzParam from_matrix(CMat U, int M, int N);

    [[nodiscard]] int M() const { return M_; }
    [[nodiscard]] int N() const { return N_; }

    cplx& operator()(int l, int k) { return U_(k + M_ - 1, l + N_ - 1); }
    [[nodiscard]] cplx operator()(int l, int k) const { return U_(k + M_ - 1, l + N_ - 1); }

    [[nodiscard]] const CMat& matrix() const { return U_; }

    /// u_l(k) <- (u_l(k) + conj(u_{-l}(-k))) / 2, making T(U) Hermitian.
    void hermitize();
    [[nodiscard]] bool is_hermitian_consistent(double tol) const;

private:
    int M_ = 0;
    int N_ = 0;
    CMat U_;
};

/// T(U): block (j1, j2) is Toep(u_{j1-j2}) and entry (a, b) of Toep(u_l) is u_l(a-b).
CMat block_toeplitz(const ToeplitzParam& U, int M, int N);

/// Average of P over each (block offset, in-block offset) index set,
/// normalised by (N-|l|)(M-|k|). Left inverse of block_toeplitz.
ToeplitzParam adjoint_normalized(const CMat& P, int M, int N);

/// Frobenius-nearest PSD matrix: Hermitian part, negative eigenvalues clamped.
CMat psd_project(const CMat& A);

/// PSD projection that computes only the eigenpairs on the smaller side of
/// the spectrum, choosing the side from the previous call. Results agree with
/// psd_project to rounding.
class PsdProjector {
public:
    CMat project(const CMat& A);
    [[nodiscard]] Index last_positive_count() const { return positive_count_; }

private:
    Index positive_count_ = -1;
};

/// Complex l1 prox: zero where |v_i| <= mu, otherwise (|v_i| - mu) v_i / |v_i|.
CVec soft_threshold(const CVec& v, double mu);

/// Hermitian (n+1) x (n+1) matrix [theta0, theta1; theta1^H, theta_bar].
struct SdpBlock {
    CMat theta0;
    CVec theta1;
    double theta_bar = 0.0;

    [[nodiscard]] CMat assemble() const;
    static SdpBlock split(const CMat& full);
};

} // namespace ddsr
