#pragma once

#include "limiting.hpp"

namespace nucnorm {

/// A point (Z, Y) on the graph of Pi_B.
struct ProjectionGraphPoint {
    Matrix Z;
    Matrix Y;
    GraphPoint graph; // (Z - Y, Y)

    static ProjectionGraphPoint make(const Matrix &Z, const Matrix &Y,
                                     const Tolerances &tol = {}) {
        require_same_shape(Z, Y, "ProjectionGraphPoint");
        return {Z, Y, GraphPoint::make(Z - Y, Y, tol)};
    }

    static ProjectionGraphPoint at(const Matrix &Z, const Tolerances &tol = {}) {
        return make(Z, project_spectral_ball(Z, tol), tol);
    }
};

/// W in D*Pi_B(Z, Y)(S) iff (W, W - S) is a limiting normal at (Z - Y, Y).
inline MembershipVerdict coderivative_membership(const ProjectionGraphPoint &pt,
                                                 const Matrix &S,
                                                 const Matrix &W,
                                                 const LimitingOptions &opt = {}) {
    require_same_shape(pt.Z, S, "coderivative_membership");
    require_same_shape(pt.Z, W, "coderivative_membership");
    return limiting_normal_membership(pt.graph, W, W - S, opt);
}

inline MembershipVerdict
regular_coderivative_membership(const ProjectionGraphPoint &pt, const Matrix &S,
                                const Matrix &W, double tol = 1e-8) {
    require_same_shape(pt.Z, S, "regular_coderivative_membership");
    require_same_shape(pt.Z, W, "regular_coderivative_membership");
    return regular_normal_membership(pt.graph, W, W - S, tol);
}

/// Matrix of H -> Pi_B'(Z; H) in column-major vec coordinates, assembled
/// from the unit directions.
inline Matrix derivative_jacobian(const SpectralFrame &f) {
    const Index m = f.m(), n = f.n();
    Matrix J(m * n, m * n);
    Matrix E = Matrix::Zero(m, n);
    for (Index k = 0; k < m * n; ++k) {
        E.setZero();
        E(k % m, k / m) = 1;
        Matrix D = dir_derivative_value(f, E);
        J.col(k) = Eigen::Map<const Vector>(D.data(), m * n);
    }
    return J;
}

/// With beta empty the directional derivative is linear and the coderivative
/// is single-valued: W = A^T S. Throws if beta is not empty.
inline Matrix adjoint_coderivative(const ProjectionGraphPoint &pt,
                                   const Matrix &S) {
    require_same_shape(pt.Z, S, "adjoint_coderivative");
    const SpectralFrame &f = pt.graph.frame;
    if (!f.partition.beta.empty())
        throw std::invalid_argument(
            "adjoint_coderivative: requires no unit singular values");
    Matrix J = derivative_jacobian(f);
    Vector w = J.transpose() * Eigen::Map<const Vector>(S.data(), S.size());
    return Eigen::Map<const Matrix>(w.data(), S.rows(), S.cols());
}

} // namespace nucnorm
