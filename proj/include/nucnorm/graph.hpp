#pragma once

#include "projection.hpp"

namespace nucnorm {

/// A pair (X, Y) on the graph of the nuclear-norm subdifferential, with the
/// frame of Zbar = X + Y.
struct GraphPoint {
    Matrix X;
    Matrix Y;
    Matrix Zbar;
    SpectralFrame frame;

    const IndexPartition &partition() const { return frame.partition; }
    const SpectralDecomposition &svd() const { return frame.svd; }
    const Tolerances &tol() const { return frame.tol; }
    Index m() const { return frame.m(); }
    Index n() const { return frame.n(); }

    /// Uses a caller-supplied decomposition of X + Y (e.g. a rotated one).
    static GraphPoint with_frame(const Matrix &X, const Matrix &Y,
                                 const SpectralDecomposition &svd,
                                 const Tolerances &tol = {}) {
        require_same_shape(X, Y, "GraphPoint");
        require_finite(X, "GraphPoint");
        require_finite(Y, "GraphPoint");
        require_wide(X, "GraphPoint");
        GraphPoint p{X, Y, X + Y, {}};
        validate_decomposition(svd, p.Zbar, tol);
        p.frame = make_frame(svd, tol);
        double err = (project_from_svd(svd) - Y).norm();
        if (err > tol.graph * (1 + p.Zbar.norm()))
            throw std::invalid_argument(
                "GraphPoint: Pi_B(X + Y) != Y (residual " +
                std::to_string(err) + ")");
        return p;
    }

    static GraphPoint make(const Matrix &X, const Matrix &Y,
                           const Tolerances &tol = {}) {
        require_same_shape(X, Y, "GraphPoint");
        require_finite(X, "GraphPoint");
        require_finite(Y, "GraphPoint");
        require_wide(X, "GraphPoint");
        return with_frame(X, Y, decompose(X + Y, tol), tol);
    }
};

/// Nuclear norm and spectral norm from singular values.
inline double nuclear_norm(const Matrix &A) {
    if (A.size() == 0)
        return 0;
    return Eigen::JacobiSVD<Matrix>(A).singularValues().sum();
}

inline double spectral_norm(const Matrix &A) {
    if (A.size() == 0)
        return 0;
    return Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
}

/// Tests Y in the subdifferential of the nuclear norm at X in three ways:
///   "subdifferential"  Y = U_r V_r^T + W with W orthogonal to the range of X
///                      and ||W||_2 <= 1,
///   "pairing"          ||X||_* = <X, Y> and ||Y||_2 <= 1,
///   "fixed_point"      Pi_B(X + Y) = Y.
/// Every threshold is tol * (1 + ||(X, Y)||_F).
inline MembershipVerdict graph_membership(const Matrix &X, const Matrix &Y,
                                          double tol = 1e-8,
                                          const Tolerances &tols = {}) {
    require_same_shape(X, Y, "graph_membership");
    require_finite(X, "graph_membership");
    require_finite(Y, "graph_membership");
    require_wide(X, "graph_membership");

    MembershipVerdict v;
    const double thr = tol * (1 + pair_norm(X, Y));

    Eigen::JacobiSVD<Matrix> sx(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector &s = sx.singularValues();
    Index r = 0;
    while (r < s.size() && s(r) > thr)
        ++r;
    Matrix Ur = sx.matrixU().leftCols(r), Vr = sx.matrixV().leftCols(r);
    Matrix D = Y - Ur * Vr.transpose();
    double r1 = (Ur.transpose() * D).norm() + (D * Vr).norm() +
                std::max(0.0, spectral_norm(D) - 1);

    double ynorm = spectral_norm(Y);
    double r2 = std::abs(s.sum() - X.cwiseProduct(Y).sum()) +
                std::max(0.0, ynorm - 1);
    double r3 = (project_spectral_ball(X + Y, tols) - Y).norm();

    v.residuals = {{"subdifferential", r1}, {"pairing", r2}, {"fixed_point", r3}};
    v.tolerances = {{"subdifferential", thr}, {"pairing", thr}, {"fixed_point", thr}};
    settle(v);
    int passed = (r1 <= thr) + (r2 <= thr) + (r3 <= thr);
    if (passed != 0 && passed != 3)
        v.notes.push_back("characterizations disagree");
    v.notes.push_back("rank(X) = " + std::to_string(r));
    return v;
}

/// (G, H) is tangent at the point iff Pi_B'(X + Y; G + H) = H.
inline MembershipVerdict tangent_membership(const GraphPoint &pt,
                                            const Matrix &G, const Matrix &H,
                                            double tol = 1e-8) {
    require_same_shape(pt.X, G, "tangent_membership");
    require_same_shape(pt.X, H, "tangent_membership");
    MembershipVerdict v;
    v.residuals["tangent"] =
        (dir_derivative_value(pt.frame, G + H) - H).norm();
    v.tolerances["tangent"] = tol * (1 + pair_norm(G, H));
    settle(v);
    return v;
}

/// Upper bounds on dist((X + tG, Y + tH), graph) obtained by projecting
/// X + Y + t(G + H) back onto the graph.
inline std::vector<double>
graph_distance_probe(const GraphPoint &pt, const Matrix &G, const Matrix &H,
                     const std::vector<double> &t_grid = default_t_grid()) {
    require_same_shape(pt.X, G, "graph_distance_probe");
    require_same_shape(pt.X, H, "graph_distance_probe");
    require_t_grid(t_grid);
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        Matrix Zt = pt.Zbar + t * (G + H);
        Matrix Yt = project_spectral_ball(Zt, pt.tol());
        Matrix Xt = Zt - Yt;
        out.push_back(pair_norm(pt.X + t * G - Xt, pt.Y + t * H - Yt));
    }
    return out;
}

} // namespace nucnorm
