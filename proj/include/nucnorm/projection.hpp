#pragma once

#include "spectral.hpp"

namespace nucnorm {

/// A decomposition together with its index partition and auxiliary matrices.
/// Singular values classified as one are snapped to exactly one before the
/// auxiliary matrices are built.
struct SpectralFrame {
    SpectralDecomposition svd;
    IndexPartition partition;
    Vector sigma_eff;
    AuxiliaryMatrices aux;
    Tolerances tol;

    Index m() const { return partition.m; }
    Index n() const { return partition.n; }
};

inline SpectralFrame make_frame(const SpectralDecomposition &svd,
                                const Tolerances &tol = {}) {
    SpectralFrame f;
    f.svd = svd;
    f.tol = tol;
    f.partition = classify_indices(svd.sigma, svd.cols(), tol.one);
    f.sigma_eff = svd.sigma;
    for (Index i : f.partition.beta)
        f.sigma_eff(i) = 1.0;
    f.aux = auxiliary_matrices(f.sigma_eff, f.partition);
    return f;
}

inline SpectralFrame make_frame(const Matrix &Z, const Tolerances &tol = {}) {
    return make_frame(decompose(Z, tol), tol);
}

/// Pi_B(Z) for a decomposed Z.
inline Matrix project_from_svd(const SpectralDecomposition &d) {
    Vector excess = (d.sigma.array() - 1.0).cwiseMax(0.0);
    return d.reconstruct() - d.U * excess.asDiagonal() * d.V1().transpose();
}

/// Projection onto {Z : ||Z||_2 <= 1}. Tall inputs are rejected unless
/// `transpose` is set, in which case the projection of Z^T is transposed back.
inline Matrix project_spectral_ball(const Matrix &Z, const Tolerances &tol = {},
                                    bool transpose = false) {
    if (transpose && Z.rows() > Z.cols())
        return project_spectral_ball(Z.transpose(), tol, false).transpose();
    SpectralDecomposition d = decompose(Z, tol);
    Vector excess = (d.sigma.array() - 1.0).cwiseMax(0.0);
    return Z - d.U * excess.asDiagonal() * d.V1().transpose();
}

/// Pi_B'(Zbar; H) with H already expressed in the frame (Htilde = U^T H V).
/// Returns the derivative in the same frame.
inline Matrix derivative_in_frame(const SpectralFrame &f, const Matrix &Ht) {
    const Index m = f.m();
    const auto &p = f.partition;
    const auto &a = p.alpha, &b = p.beta, &g = p.gamma;
    const auto &x = f.aux;

    Matrix H1 = Ht.leftCols(m);
    Matrix S = (H1 + H1.transpose()) / 2;
    Matrix K = (H1 - H1.transpose()) / 2;

    Matrix out = Ht;
    Matrix O2K = x.omega2.cwiseProduct(K);
    out(a, a) = O2K(a, a);
    out(a, b) = O2K(a, b);
    out(b, a) = O2K(b, a);
    Matrix mixed = x.omega1.cwiseProduct(S) + O2K;
    out(a, g) = mixed(a, g);
    out(g, a) = mixed(g, a);
    if (!b.empty()) {
        Matrix Hbb = Ht(b, b);
        out(b, b) = Hbb - psd_project(sym_part(Hbb), f.tol);
    }
    for (Index i : a)
        for (Index j = m; j < p.n; ++j)
            out(i, j) = x.omega3(i, j - m) * Ht(i, j);
    return out;
}

struct DirectionalDerivativeResult {
    Matrix value;
    SpectralFrame frame;

    const SpectralDecomposition &svd() const { return frame.svd; }
    const IndexPartition &partition() const { return frame.partition; }
    const AuxiliaryMatrices &aux() const { return frame.aux; }
};

inline Matrix dir_derivative_value(const SpectralFrame &f, const Matrix &H) {
    if (H.rows() != f.m() || H.cols() != f.n())
        throw std::invalid_argument("dir_derivative: dimension mismatch");
    require_finite(H, "dir_derivative");
    if (f.partition.alpha.empty() && f.partition.beta.empty())
        return H;
    return f.svd.from_frame(derivative_in_frame(f, f.svd.to_frame(H)));
}

inline DirectionalDerivativeResult dir_derivative(const SpectralFrame &f,
                                                  const Matrix &H) {
    return {dir_derivative_value(f, H), f};
}

inline DirectionalDerivativeResult dir_derivative(const Matrix &Zbar,
                                                  const Matrix &H,
                                                  const Tolerances &tol = {}) {
    require_same_shape(Zbar, H, "dir_derivative");
    return dir_derivative(make_frame(Zbar, tol), H);
}

inline std::vector<double> default_t_grid() { return {1e-1, 1e-2, 1e-3, 1e-4}; }

inline void require_t_grid(const std::vector<double> &t_grid) {
    if (t_grid.empty())
        throw std::invalid_argument("t_grid: empty");
    for (size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0) || !std::isfinite(t_grid[i]))
            throw std::invalid_argument("t_grid: entries must be positive");
        if (i > 0 && !(t_grid[i] < t_grid[i - 1]))
            throw std::invalid_argument("t_grid: must be strictly decreasing");
    }
}

/// One-sided difference quotients (Pi_B(Zbar + tH) - Pi_B(Zbar)) / t.
inline std::vector<Matrix>
fd_dir_derivative(const Matrix &Zbar, const Matrix &H,
                  const std::vector<double> &t_grid = default_t_grid(),
                  const Tolerances &tol = {}) {
    require_same_shape(Zbar, H, "fd_dir_derivative");
    require_t_grid(t_grid);
    Matrix P0 = project_spectral_ball(Zbar, tol);
    std::vector<Matrix> out;
    out.reserve(t_grid.size());
    for (double t : t_grid)
        out.push_back((project_spectral_ball(Zbar + t * H, tol) - P0) / t);
    return out;
}

/// ||Pi_B(Zbar + H) - Pi_B(Zbar) - Pi_B'(Zbar; H)||_F.
inline double calmness_residual(const Matrix &Zbar, const Matrix &H,
                                const Tolerances &tol = {}) {
    require_same_shape(Zbar, H, "calmness_residual");
    SpectralFrame f = make_frame(Zbar, tol);
    return (project_spectral_ball(Zbar + H, tol) -
            project_spectral_ball(Zbar, tol) - dir_derivative_value(f, H))
        .norm();
}

} // namespace nucnorm
