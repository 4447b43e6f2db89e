#pragma once

#include "core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>

namespace nucnorm {

/// SVD Z = U [Diag(sigma) 0] V^T of a wide (m <= n) matrix, with sigma
/// non-increasing and a canonical column-sign convention.
struct SpectralDecomposition {
    Matrix U;     // m x m
    Vector sigma; // m, non-increasing
    Matrix V;     // n x n

    Index rows() const { return U.rows(); }
    Index cols() const { return V.rows(); }
    auto V1() const { return V.leftCols(rows()); }

    Matrix reconstruct() const {
        return U * sigma.asDiagonal() * V.leftCols(rows()).transpose();
    }

    /// U^T A V, the matrix A expressed in this frame.
    Matrix to_frame(const Matrix &A) const { return U.transpose() * A * V; }
    Matrix from_frame(const Matrix &A) const { return U * A * V.transpose(); }
};

namespace detail {

inline void flip_to_first_positive(Matrix &A, Index col, Matrix *partner,
                                   Index partner_col) {
    for (Index i = 0; i < A.rows(); ++i) {
        double v = A(i, col);
        if (std::abs(v) > 1e-12) {
            if (v < 0) {
                A.col(col) *= -1;
                if (partner)
                    partner->col(partner_col) *= -1;
            }
            return;
        }
    }
}

inline double orthogonality_error(const Matrix &Q) {
    return (Q.transpose() * Q - Matrix::Identity(Q.cols(), Q.cols())).norm();
}

} // namespace detail

/// Checks the decomposition invariants against the matrix it claims to factor.
inline void validate_decomposition(const SpectralDecomposition &d,
                                   const Matrix &Z, const Tolerances &tol = {}) {
    const Index m = Z.rows(), n = Z.cols();
    if (d.U.rows() != m || d.U.cols() != m || d.V.rows() != n ||
        d.V.cols() != n || d.sigma.size() != m)
        throw std::invalid_argument("decomposition: inconsistent dimensions");
    for (Index i = 0; i < m; ++i) {
        if (!(d.sigma(i) >= 0))
            throw NumericError("decomposition: negative singular value");
        if (i > 0 && d.sigma(i) > d.sigma(i - 1))
            throw NumericError("decomposition: singular values not sorted");
    }
    if (detail::orthogonality_error(d.U) > tol.orth.at(1) ||
        detail::orthogonality_error(d.V) > tol.orth.at(1))
        throw NumericError("decomposition: factors not orthogonal");
    if ((d.reconstruct() - Z).norm() > tol.recon.at(Z.norm()))
        throw NumericError("decomposition: reconstruction failed");
}

/// Deterministic full SVD of a wide matrix.
inline SpectralDecomposition decompose(const Matrix &Z,
                                       const Tolerances &tol = {}) {
    require_finite(Z, "decompose");
    require_wide(Z, "decompose");
    const Index m = Z.rows(), n = Z.cols();

    Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success)
        throw NumericError("decompose: SVD did not converge");

    SpectralDecomposition d{svd.matrixU(), svd.singularValues(),
                            svd.matrixV()};
    for (Index j = 0; j < m; ++j)
        detail::flip_to_first_positive(d.U, j, &d.V, j);
    for (Index j = m; j < n; ++j)
        detail::flip_to_first_positive(d.V, j, nullptr, 0);

    validate_decomposition(d, Z, tol);
    return d;
}

inline Matrix sym_part(const Matrix &Z) {
    require_square(Z, "sym_part");
    return (Z + Z.transpose()) / 2;
}

inline Matrix skew_part(const Matrix &Z) {
    require_square(Z, "skew_part");
    return (Z - Z.transpose()) / 2;
}

/// Eigenvalues of the symmetric part, ascending. Empty input gives empty.
inline Vector sym_eigenvalues(const Matrix &A) {
    if (A.size() == 0)
        return Vector(0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym_part(A),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double sym_lambda_max(const Matrix &A) {
    Vector ev = sym_eigenvalues(A);
    return ev.size() ? ev(ev.size() - 1) : 0.0;
}

inline double sym_lambda_min(const Matrix &A) {
    Vector ev = sym_eigenvalues(A);
    return ev.size() ? ev(0) : 0.0;
}

/// Frobenius projection onto the PSD cone by eigenvalue clipping.
inline Matrix psd_project(const Matrix &S, const Tolerances &tol = {}) {
    require_square(S, "psd_project");
    require_finite(S, "psd_project");
    if (S.size() == 0)
        return S;
    if ((S - S.transpose()).norm() > tol.sym.at(S.norm()))
        throw std::invalid_argument("psd_project: input is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym_part(S));
    if (es.info() != Eigen::Success)
        throw NumericError("psd_project: eigendecomposition failed");
    Vector clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() *
           es.eigenvectors().transpose();
}

/// Componentwise mid(-1, x, 1).
inline Vector mid_clip(const Vector &x) {
    return x.cwiseMax(-1.0).cwiseMin(1.0);
}

/// Directional derivative of mid_clip at x along h.
inline Vector mid_clip_dir(const Vector &x, const Vector &h) {
    if (x.size() != h.size())
        throw std::invalid_argument("mid_clip_dir: length mismatch");
    Vector out(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        double a = std::abs(x(i));
        if (a > 1)
            out(i) = 0;
        else if (a == 1) {
            double s = x(i) > 0 ? 1.0 : -1.0;
            out(i) = s * std::min(0.0, s * h(i));
        } else
            out(i) = h(i);
    }
    return out;
}

/// Index sets alpha (sigma > 1), beta (sigma = 1), gamma (sigma < 1) and the
/// trailing columns c = {m, ..., n-1}. Zero-based.
struct IndexPartition {
    IndexList alpha;
    IndexList beta;
    IndexList gamma;
    Index m = 0;
    Index n = 0;
    double tol_one = 0;

    IndexList c() const {
        IndexList out(static_cast<size_t>(n - m));
        std::iota(out.begin(), out.end(), m);
        return out;
    }
    IndexList first_m() const {
        IndexList out(static_cast<size_t>(m));
        std::iota(out.begin(), out.end(), Index{0});
        return out;
    }
};

inline IndexPartition classify_indices(const Vector &sigma, Index n,
                                       double tol_one) {
    const Index m = sigma.size();
    if (n < m)
        throw std::invalid_argument("classify_indices: n < m");
    for (Index i = 1; i < m; ++i)
        if (sigma(i) > sigma(i - 1))
            throw std::invalid_argument("classify_indices: sigma not sorted");
    IndexPartition p;
    p.m = m;
    p.n = n;
    p.tol_one = tol_one;
    for (Index i = 0; i < m; ++i) {
        if (!(sigma(i) >= 0))
            throw std::invalid_argument("classify_indices: negative sigma");
        if (sigma(i) > 1 + tol_one)
            p.alpha.push_back(i);
        else if (sigma(i) >= 1 - tol_one)
            p.beta.push_back(i);
        else
            p.gamma.push_back(i);
    }
    return p;
}

struct OmegaMatrices {
    Matrix omega1; // m x m
    Matrix omega2; // m x m
    Matrix omega3; // m x (n - m)
};

namespace detail {

// No ordering requirement; used for perturbed spectra in any order.
inline OmegaMatrices omega_unsorted(const Vector &s, Index n) {
    const Index m = s.size();
    OmegaMatrices o{Matrix::Zero(m, m), Matrix::Zero(m, m),
                    Matrix::Zero(m, n - m)};
    auto h = [](double t) { return std::min(1.0, t); };
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            if (s(i) != s(j))
                o.omega1(i, j) = (h(s(i)) - h(s(j))) / (s(i) - s(j));
            if (s(i) + s(j) != 0)
                o.omega2(i, j) = (h(s(i)) + h(s(j))) / (s(i) + s(j));
        }
        if (s(i) != 0)
            o.omega3.row(i).setConstant(h(s(i)) / s(i));
    }
    return o;
}

} // namespace detail

/// Divided-difference matrices of t -> min(1, t) over the singular values.
inline OmegaMatrices omega_matrices(const Vector &sigma, Index n) {
    if (n < sigma.size())
        throw std::invalid_argument("omega_matrices: n < m");
    for (Index i = 0; i < sigma.size(); ++i) {
        if (!(sigma(i) >= 0))
            throw std::invalid_argument("omega_matrices: negative sigma");
        if (i > 0 && sigma(i) > sigma(i - 1))
            throw std::invalid_argument("omega_matrices: sigma not sorted");
    }
    return detail::omega_unsorted(sigma, n);
}

struct AuxiliaryMatrices {
    Matrix omega1, omega2, omega3;
    Matrix theta1, theta2;
    Matrix sigma1, sigma2;
};

/// Assembles the block matrices Theta1, Theta2, Sigma1, Sigma2 that encode
/// the equality part of the regular normal cone.
inline AuxiliaryMatrices theta_sigma_matrices(const IndexPartition &p,
                                              const Matrix &omega1,
                                              const Matrix &omega2) {
    const Index m = p.m;
    if (omega1.rows() != m || omega1.cols() != m || omega2.rows() != m ||
        omega2.cols() != m)
        throw std::invalid_argument("theta_sigma_matrices: dimension mismatch");
    const auto &a = p.alpha, &b = p.beta, &g = p.gamma;
    Matrix E = Matrix::Ones(m, m);

    AuxiliaryMatrices x;
    x.omega1 = omega1;
    x.omega2 = omega2;
    x.theta1 = Matrix::Zero(m, m);
    x.theta2 = Matrix::Zero(m, m);
    x.sigma1 = Matrix::Zero(m, m);
    x.sigma2 = Matrix::Zero(m, m);

    x.theta1(a, g) = omega1(a, g);
    x.theta1(g, a) = omega1(g, a);
    x.theta1(b, g) = E(b, g);
    x.theta1(g, b) = E(g, b);
    x.theta1(g, g) = E(g, g);

    x.theta2(a, a) = E(a, a);
    x.theta2(a, b) = E(a, b);
    x.theta2(b, a) = E(b, a);
    x.theta2(a, g) = E(a, g) - omega1(a, g);
    x.theta2(g, a) = E(g, a) - omega1(g, a);

    x.sigma1(a, a) = omega2(a, a);
    x.sigma1(a, b) = omega2(a, b);
    x.sigma1(a, g) = omega2(a, g);
    x.sigma1(b, a) = omega2(b, a);
    x.sigma1(g, a) = omega2(g, a);
    x.sigma1(b, g) = E(b, g);
    x.sigma1(g, b) = E(g, b);
    x.sigma1(g, g) = E(g, g);

    x.sigma2(a, a) = E(a, a) - omega2(a, a);
    x.sigma2(a, b) = E(a, b) - omega2(a, b);
    x.sigma2(a, g) = E(a, g) - omega2(a, g);
    x.sigma2(b, a) = E(b, a) - omega2(b, a);
    x.sigma2(g, a) = E(g, a) - omega2(g, a);
    return x;
}

/// Full auxiliary set for a partitioned spectrum.
inline AuxiliaryMatrices auxiliary_matrices(const Vector &sigma,
                                            const IndexPartition &p) {
    OmegaMatrices o = omega_matrices(sigma, p.n);
    AuxiliaryMatrices x = theta_sigma_matrices(p, o.omega1, o.omega2);
    x.omega3 = o.omega3;
    return x;
}

/// Generalized first divided difference of t -> min(1, t) at z.
inline Matrix divided_difference(const Vector &z) {
    const Index k = z.size();
    for (Index i = 0; i < k; ++i)
        if (!(z(i) > 0))
            throw std::invalid_argument(
                "divided_difference: entries must be positive");
    Matrix D(k, k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) {
            if (z(i) != z(j))
                D(i, j) = (std::min(1.0, z(i)) - std::min(1.0, z(j))) /
                          (z(i) - z(j));
            else
                D(i, j) = z(i) >= 1 ? 0.0 : 1.0;
        }
    return D;
}

inline void validate_sub_partition(const BetaSubPartition &p, Index size) {
    std::vector<int> seen(static_cast<size_t>(size), 0);
    for (const IndexList *l : {&p.plus, &p.zero, &p.minus})
        for (Index i : *l) {
            if (i < 0 || i >= size || seen[static_cast<size_t>(i)]++)
                throw std::invalid_argument(
                    "sub-partition: indices must partition the beta block");
        }
    if (p.size() != size)
        throw std::invalid_argument("sub-partition: size mismatch");
}

/// Assembles (Xi1, Xi2) for a sub-partition and a (beta+, beta-) block with
/// entries in [0, 1].
inline XiPair xi_pair(const BetaSubPartition &part, const Matrix &free_block) {
    const Index b = part.size();
    validate_sub_partition(part, b);
    const Index np = static_cast<Index>(part.plus.size());
    const Index nm = static_cast<Index>(part.minus.size());
    if (free_block.rows() != np || free_block.cols() != nm)
        throw std::invalid_argument("xi_pair: free block has wrong shape");
    if (free_block.size() &&
        (free_block.minCoeff() < 0 || free_block.maxCoeff() > 1 ||
         !free_block.allFinite()))
        throw std::invalid_argument("xi_pair: free entries must lie in [0,1]");

    const auto &P = part.plus, &Z = part.zero, &M = part.minus;
    XiPair x{part, Matrix::Zero(b, b), Matrix::Zero(b, b), free_block};
    x.xi1(P, M) = free_block;
    x.xi1(M, P) = free_block.transpose();
    x.xi1(Z, M).setOnes();
    x.xi1(M, Z).setOnes();
    x.xi1(M, M).setOnes();

    x.xi2(P, P).setOnes();
    x.xi2(P, Z).setOnes();
    x.xi2(Z, P).setOnes();
    x.xi2(P, M) = Matrix::Ones(np, nm) - free_block;
    x.xi2(M, P) = (Matrix::Ones(np, nm) - free_block).transpose();
    return x;
}

} // namespace nucnorm
