#pragma once

#include "graph.hpp"

#include <random>

namespace nucnorm {

/// Candidate normal (X*, Y*) expressed in the frame of a graph point.
struct FramedCandidate {
    Matrix Xt;
    Matrix Yt;
};

inline FramedCandidate to_frame(const GraphPoint &pt, const Matrix &Xs,
                                const Matrix &Ys) {
    require_same_shape(pt.X, Xs, "normal cone candidate");
    require_same_shape(pt.X, Ys, "normal cone candidate");
    require_finite(Xs, "normal cone candidate");
    require_finite(Ys, "normal cone candidate");
    return {pt.svd().to_frame(Xs), pt.svd().to_frame(Ys)};
}

/// Theta1 o S(Y1) + Theta2 o S(X1) + Sigma1 o X(Y1) + Sigma2 o X(X1), where
/// X1, Y1 are the first m columns of the framed pair. Its beta-beta block is
/// identically zero.
inline Matrix block_system(const AuxiliaryMatrices &aux, const Matrix &Xt,
                           const Matrix &Yt) {
    const Index m = aux.theta1.rows();
    Matrix X1 = Xt.leftCols(m), Y1 = Yt.leftCols(m);
    Matrix SX = (X1 + X1.transpose()) / 2, KX = (X1 - X1.transpose()) / 2;
    Matrix SY = (Y1 + Y1.transpose()) / 2, KY = (Y1 - Y1.transpose()) / 2;
    return aux.theta1.cwiseProduct(SY) + aux.theta2.cwiseProduct(SX) +
           aux.sigma1.cwiseProduct(KY) + aux.sigma2.cwiseProduct(KX);
}

/// X~_{alpha c} o (E - Omega3_{alpha c}) + Y~_{alpha c} o Omega3_{alpha c}.
inline Matrix alpha_c_system(const SpectralFrame &f, const Matrix &Xt,
                             const Matrix &Yt) {
    const Index m = f.m(), n = f.n();
    const auto &a = f.partition.alpha;
    Matrix out(static_cast<Index>(a.size()), n - m);
    for (size_t r = 0; r < a.size(); ++r)
        for (Index j = m; j < n; ++j) {
            double w = f.aux.omega3(a[r], j - m);
            out(static_cast<Index>(r), j - m) =
                (1 - w) * Xt(a[r], j) + w * Yt(a[r], j);
        }
    return out;
}

/// ||A_{rows, c}||_F for the trailing columns c.
inline double c_block_norm(const Matrix &A, const IndexList &rows, Index m) {
    double s = 0;
    for (Index i : rows)
        s += A.row(i).tail(A.cols() - m).squaredNorm();
    return std::sqrt(s);
}

/// Regular (equivalently proximal) normal cone test. The beta-beta block
/// must satisfy S(X~_bb) <= 0, Y~_bb symmetric and Y~_bb >= 0; the skew part
/// of X~_bb is unconstrained.
inline MembershipVerdict regular_normal_membership(const GraphPoint &pt,
                                                   const Matrix &Xs,
                                                   const Matrix &Ys,
                                                   double tol = 1e-8) {
    FramedCandidate c = to_frame(pt, Xs, Ys);
    const auto &p = pt.partition();
    const auto &b = p.beta;

    double r1 = block_system(pt.frame.aux, c.Xt, c.Yt).norm();
    double r2 = alpha_c_system(pt.frame, c.Xt, c.Yt).norm();

    double r3 = c_block_norm(c.Yt, b, p.m) + c_block_norm(c.Yt, p.gamma, p.m);
    MembershipVerdict v;
    if (!b.empty()) {
        Matrix Xbb = c.Xt(b, b), Ybb = c.Yt(b, b);
        double xmax = sym_lambda_max(Xbb);
        double ymin = sym_lambda_min(Ybb);
        double yskew = skew_part(Ybb).norm();
        r3 += std::max(0.0, xmax) + std::max(0.0, -ymin) + yskew;
        if (skew_part(Xbb).norm() > pt.tol().sym.at(Xbb.norm()))
            v.notes.push_back("X~_bb is not symmetric; its skew part is free");
        if (yskew > pt.tol().sym.at(Ybb.norm()))
            v.notes.push_back("Y~_bb is not symmetric");
    }

    const double thr = tol * (1 + pair_norm(Xs, Ys));
    v.residuals = {{"block_system", r1}, {"alpha_c", r2}, {"beta_c_sign", r3}};
    v.tolerances = {{"block_system", thr}, {"alpha_c", thr}, {"beta_c_sign", thr}};
    v.notes.push_back("partition |alpha|=" + std::to_string(p.alpha.size()) +
                      " |beta|=" + std::to_string(b.size()) +
                      " |gamma|=" + std::to_string(p.gamma.size()));
    settle(v);
    return v;
}

/// <X~*, W~ - D(W~)> + <Y~*, D(W~)> with D the framed derivative.
inline double proximal_lhs_framed(const SpectralFrame &f, const Matrix &Xt,
                                  const Matrix &Yt, const Matrix &Wt) {
    Matrix D = derivative_in_frame(f, Wt);
    return Xt.cwiseProduct(Wt - D).sum() + Yt.cwiseProduct(D).sum();
}

struct ProbeResult {
    double max_violation = -std::numeric_limits<double>::infinity();
    Matrix worst_W;
    Index directions = 0;
};

namespace detail {

inline void probe_update(ProbeResult &r, const SpectralFrame &f,
                         const FramedCandidate &c, const Matrix &Wt) {
    double nrm = Wt.norm();
    if (nrm == 0)
        return;
    Matrix W = Wt / nrm;
    double lhs = proximal_lhs_framed(f, c.Xt, c.Yt, W);
    ++r.directions;
    if (lhs > r.max_violation) {
        r.max_violation = lhs;
        r.worst_W = W;
    }
}

inline void embed_beta(Matrix &Wt, const IndexList &b, const Matrix &B) {
    Wt.setZero();
    Wt(b, b) = B;
}

} // namespace detail

/// Samples the proximal-normal inequality over unit directions W: every
/// single-entry direction of the frame, symmetric and skew entry pairs,
/// eigen-directions of the beta-beta blocks, and `num_samples` Gaussian
/// directions. Returns the largest left-hand side and its direction.
inline ProbeResult proximal_inequality_probe(const GraphPoint &pt,
                                             const Matrix &Xs, const Matrix &Ys,
                                             Index num_samples,
                                             std::uint64_t seed) {
    if (num_samples < 1)
        throw std::invalid_argument("proximal_inequality_probe: num_samples < 1");
    FramedCandidate c = to_frame(pt, Xs, Ys);
    const SpectralFrame &f = pt.frame;
    const Index m = f.m(), n = f.n();
    const auto &b = f.partition.beta;
    ProbeResult r;
    Matrix Wt = Matrix::Zero(m, n);

    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j)
            for (double s : {1.0, -1.0}) {
                Wt.setZero();
                Wt(i, j) = s;
                detail::probe_update(r, f, c, Wt);
            }
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j)
            for (double s : {1.0, -1.0})
                for (double sign : {1.0, -1.0}) {
                    Wt.setZero();
                    Wt(i, j) = sign;
                    Wt(j, i) = sign * s;
                    detail::probe_update(r, f, c, Wt);
                }
    if (!b.empty()) {
        for (const Matrix &B : {Matrix(c.Xt(b, b)), Matrix(c.Yt(b, b))}) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(sym_part(B));
            for (Index k = 0; k < B.rows(); ++k) {
                Vector v = es.eigenvectors().col(k);
                for (double s : {1.0, -1.0}) {
                    detail::embed_beta(Wt, b, s * v * v.transpose());
                    detail::probe_update(r, f, c, Wt);
                }
            }
            Matrix K = skew_part(B);
            for (double s : {1.0, -1.0}) {
                detail::embed_beta(Wt, b, s * K);
                detail::probe_update(r, f, c, Wt);
            }
        }
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (Index k = 0; k < num_samples; ++k) {
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < m; ++i)
                Wt(i, j) = gauss(rng);
        detail::probe_update(r, f, c, Wt);
    }
    r.worst_W = pt.svd().from_frame(r.worst_W);
    return r;
}

/// Residuals of the limiting-cone conditions outside the beta-beta block.
inline std::map<std::string, double>
limiting_linear_residuals(const GraphPoint &pt, const Matrix &G,
                          const Matrix &H) {
    FramedCandidate c = to_frame(pt, G, H);
    const auto &p = pt.partition();
    return {{"block_system", block_system(pt.frame.aux, c.Xt, c.Yt).norm()},
            {"alpha_c", alpha_c_system(pt.frame, c.Xt, c.Yt).norm()},
            {"beta_c", c_block_norm(c.Yt, p.beta, p.m)},
            {"gamma_c", c_block_norm(c.Yt, p.gamma, p.m)}};
}

/// Beta-beta certificate residual for M = G~_bb, N = H~_bb:
///   ||Xi1 o N^ + Xi2 o S(M^) + Xi2 o X(N^)||_F
///   + max(0, lambda_max S(M^_00)) + max(0, -lambda_min S(N^_00))
///   + ||X(N^_00)||_F
/// with M^ = Q^T M Q, N^ = Q^T N Q.
inline double beta_certificate_residual(const Matrix &M, const Matrix &N,
                                        const LimitingCertificate &cert) {
    const Index b = M.rows();
    Matrix Mh = cert.Q.transpose() * M * cert.Q;
    Matrix Nh = cert.Q.transpose() * N * cert.Q;
    Matrix R = cert.xi.xi1.cwiseProduct(Nh) +
               cert.xi.xi2.cwiseProduct(sym_part(Mh)) +
               cert.xi.xi2.cwiseProduct(skew_part(Nh));
    double r = R.norm();
    const auto &z = cert.sub_partition.zero;
    if (!z.empty() && b > 0) {
        Matrix M00 = Mh(z, z), N00 = Nh(z, z);
        r += std::max(0.0, sym_lambda_max(M00)) +
             std::max(0.0, -sym_lambda_min(N00)) + skew_part(N00).norm();
    }
    return r;
}

inline void validate_certificate(const LimitingCertificate &cert, Index b,
                                 const Tolerances &tol = {}) {
    validate_sub_partition(cert.sub_partition, b);
    if (cert.Q.rows() != b || cert.Q.cols() != b)
        throw std::invalid_argument("certificate: Q has wrong shape");
    if (!cert.Q.allFinite() ||
        detail::orthogonality_error(cert.Q) > tol.orth.at(1) * 10)
        throw std::invalid_argument("certificate: Q is not orthogonal");
    if (cert.xi.xi1.rows() != b || cert.xi.xi2.rows() != b)
        throw std::invalid_argument("certificate: Xi has wrong shape");
    XiPair expect = xi_pair(cert.sub_partition, cert.xi.free_block);
    if ((expect.xi1 - cert.xi.xi1).norm() > 1e-12 ||
        (expect.xi2 - cert.xi.xi2).norm() > 1e-12)
        throw std::invalid_argument(
            "certificate: Xi does not match its sub-partition");
}

inline MembershipVerdict verify_beta_certificate(const Matrix &M,
                                                 const Matrix &N,
                                                 const LimitingCertificate &cert,
                                                 double tol = 1e-8,
                                                 const Tolerances &tols = {}) {
    require_square(M, "verify_beta_certificate");
    require_same_shape(M, N, "verify_beta_certificate");
    validate_certificate(cert, M.rows(), tols);
    MembershipVerdict v;
    v.residuals["beta_certificate"] = beta_certificate_residual(M, N, cert);
    v.tolerances["beta_certificate"] = tol * (1 + pair_norm(M, N));
    settle(v);
    if (v.member()) {
        v.certificate = cert;
        v.certificate->residual_beta = v.residuals["beta_certificate"];
    }
    return v;
}

} // namespace nucnorm
