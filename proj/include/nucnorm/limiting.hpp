#pragma once

#include "normal_cones.hpp"
#include "parallel.hpp"
#include "random.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <numeric>

namespace nucnorm {

struct LimitingOptions {
    double tol = 1e-8;
    /// Random orthogonal restarts per sub-partition shape.
    Index budget = 16;
    std::uint64_t seed = 0;
    /// 0 means default_threads().
    unsigned threads = 0;
};

namespace detail {

struct Composition {
    Index plus, zero, minus;
};

/// Shapes (|beta+|, |beta0|, |beta-|) in lexicographic order. Q absorbs any
/// reordering of the beta positions, so contiguous blocks suffice.
inline std::vector<Composition> compositions(Index b) {
    std::vector<Composition> out;
    for (Index p = 0; p <= b; ++p)
        for (Index z = 0; z + p <= b; ++z)
            out.push_back({p, z, b - p - z});
    return out;
}

inline BetaSubPartition contiguous_partition(const Composition &c) {
    BetaSubPartition s;
    Index k = 0;
    for (Index i = 0; i < c.plus; ++i)
        s.plus.push_back(k++);
    for (Index i = 0; i < c.zero; ++i)
        s.zero.push_back(k++);
    for (Index i = 0; i < c.minus; ++i)
        s.minus.push_back(k++);
    return s;
}

/// Xi1 entry on (beta+, beta-) minimizing |t n + (1 - t) a| over [0, 1].
inline double best_free_entry(double a, double n) {
    const double tiny = 1e-300;
    if (std::abs(a) <= tiny && std::abs(n) <= tiny)
        return 0.5;
    if (a * n <= 0) {
        double t = a / (a - n);
        return std::clamp(t, 0.0, 1.0);
    }
    return std::abs(n) < std::abs(a) ? 1.0 : 0.0;
}

class CertificateObjective {
  public:
    CertificateObjective(const Matrix &A, const Matrix &N, const Composition &c)
        : A_(A), N_(N), c_(c), part_(contiguous_partition(c)) {}

    /// Residual vector whose squared norm measures the certificate violation
    /// for rotation Q with the best free block.
    Vector residuals(const Matrix &Q) const {
        Matrix Ah = Q.transpose() * A_ * Q;
        Matrix Nh = Q.transpose() * N_ * Q;
        const auto &P = part_.plus, &Z = part_.zero, &M = part_.minus;
        std::vector<double> r;
        const double s2 = std::sqrt(2.0);
        for (Index i : P)
            for (Index j : P)
                r.push_back(Ah(i, j));
        for (Index i : P)
            for (Index j : Z)
                r.push_back(s2 * Ah(i, j));
        for (Index i : Z)
            for (Index j : M)
                r.push_back(s2 * Nh(i, j));
        for (Index i : M)
            for (Index j : M)
                r.push_back(Nh(i, j));
        for (Index i : P)
            for (Index j : M) {
                double a = Ah(i, j), n = Nh(i, j);
                double t = best_free_entry(a, n);
                r.push_back(s2 * (t * n + (1 - t) * a));
            }
        if (!Z.empty()) {
            for (double e : sym_eigenvalues(Ah(Z, Z)))
                r.push_back(std::max(0.0, e));
            for (double e : sym_eigenvalues(Nh(Z, Z)))
                r.push_back(std::min(0.0, e));
        }
        return Eigen::Map<Vector>(r.data(), static_cast<Index>(r.size()));
    }

    double value(const Matrix &Q) const { return residuals(Q).norm(); }

    Matrix free_block(const Matrix &Q) const {
        Matrix Ah = Q.transpose() * A_ * Q;
        Matrix Nh = Q.transpose() * N_ * Q;
        Matrix T(c_.plus, c_.minus);
        for (Index i = 0; i < c_.plus; ++i)
            for (Index j = 0; j < c_.minus; ++j)
                T(i, j) = best_free_entry(Ah(part_.plus[i], part_.minus[j]),
                                          Nh(part_.plus[i], part_.minus[j]));
        return T;
    }

    const BetaSubPartition &partition() const { return part_; }

  private:
    Matrix A_, N_;
    Composition c_;
    BetaSubPartition part_;
};

inline Matrix skew_from_params(const Vector &k, Index b) {
    Matrix K = Matrix::Zero(b, b);
    Index idx = 0;
    for (Index i = 0; i < b; ++i)
        for (Index j = i + 1; j < b; ++j) {
            K(i, j) = k(idx);
            K(j, i) = -k(idx);
            ++idx;
        }
    return K;
}

/// Q0 (I - K)^{-1} (I + K).
inline Matrix cayley_step(const Matrix &Q0, const Vector &k) {
    const Index b = Q0.rows();
    Matrix K = skew_from_params(k, b);
    Matrix I = Matrix::Identity(b, b);
    return Q0 * (I - K).partialPivLu().solve(I + K);
}

inline Matrix givens_sweep(const CertificateObjective &obj, Matrix Q) {
    const Index b = Q.rows();
    double best = obj.value(Q);
    constexpr int steps = 16;
    for (Index i = 0; i < b; ++i)
        for (Index j = i + 1; j < b; ++j) {
            Matrix bestQ = Q;
            for (int s = 1; s < steps; ++s) {
                double th = M_PI * s / steps;
                Matrix G = Matrix::Identity(b, b);
                G(i, i) = G(j, j) = std::cos(th);
                G(i, j) = -std::sin(th);
                G(j, i) = std::sin(th);
                Matrix cand = Q * G;
                double v = obj.value(cand);
                if (v < best) {
                    best = v;
                    bestQ = cand;
                }
            }
            Q = bestQ;
        }
    return Q;
}

/// Levenberg-Marquardt over Cayley coordinates, recentred after every
/// accepted step.
inline Matrix refine_rotation(const CertificateObjective &obj, Matrix Q,
                              double target, int max_iter = 100) {
    const Index b = Q.rows();
    const Index np = b * (b - 1) / 2;
    if (np == 0)
        return Q;
    Vector r = obj.residuals(Q);
    double lambda = 1e-3;
    const double h = 1e-7;
    for (int it = 0; it < max_iter && r.norm() > target; ++it) {
        Matrix J(r.size(), np);
        for (Index k = 0; k < np; ++k) {
            Vector e = Vector::Zero(np);
            e(k) = h;
            J.col(k) = (obj.residuals(cayley_step(Q, e)) -
                        obj.residuals(cayley_step(Q, -e))) /
                       (2 * h);
        }
        Matrix JtJ = J.transpose() * J;
        Vector g = J.transpose() * r;
        bool accepted = false;
        while (lambda < 1e12) {
            Matrix Aug = JtJ + lambda * Matrix::Identity(np, np);
            Vector step = -Aug.ldlt().solve(g);
            Matrix cand = cayley_step(Q, step);
            Vector rc = obj.residuals(cand);
            if (rc.norm() < r.norm()) {
                Q = cand;
                r = rc;
                lambda = std::max(lambda / 3, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 4;
        }
        if (!accepted)
            break;
    }
    // Re-orthonormalize to remove drift from repeated Cayley products.
    Eigen::HouseholderQR<Matrix> qr(Q);
    Matrix Qo = qr.householderQ();
    Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < b; ++j)
        if (R(j, j) < 0)
            Qo.col(j) *= -1;
    return Qo;
}

inline std::vector<Matrix> structured_seeds(const Matrix &A, const Matrix &N) {
    const Index b = A.rows();
    const double phi = 0.6180339887498949;
    std::vector<Matrix> bases{Matrix::Identity(b, b)};
    for (const Matrix &S : {A, N, Matrix(A + phi * N), Matrix(A - phi * N)}) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(S);
        bases.push_back(es.eigenvectors());
    }
    if (b > 4)
        return bases;
    std::vector<Matrix> out;
    std::vector<Index> perm(static_cast<size_t>(b));
    for (const Matrix &B : bases) {
        std::iota(perm.begin(), perm.end(), Index{0});
        do {
            Matrix P(b, b);
            for (Index j = 0; j < b; ++j)
                P.col(j) = B.col(perm[static_cast<size_t>(j)]);
            out.push_back(P);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

struct CompositionResult {
    double residual = std::numeric_limits<double>::infinity();
    Matrix Q;
    Matrix free_block;
    BetaSubPartition partition;
};

inline CompositionResult search_composition(const Matrix &A, const Matrix &N,
                                            const Composition &c, double target,
                                            Index budget, std::uint64_t seed) {
    const Index b = A.rows();
    CertificateObjective obj(A, N, c);
    std::vector<Matrix> seeds = structured_seeds(A, N);
    Rng rng(seed);
    for (Index k = 0; k < budget; ++k)
        seeds.push_back(haar_orthogonal(b, rng));

    std::vector<std::pair<double, size_t>> order;
    for (size_t i = 0; i < seeds.size(); ++i)
        order.emplace_back(obj.value(seeds[i]), i);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto &x, const auto &y) { return x.first < y.first; });

    CompositionResult best;
    best.partition = obj.partition();
    const size_t refine =
        std::min(order.size(), static_cast<size_t>(std::max<Index>(budget, 4)));
    for (size_t k = 0; k < refine; ++k) {
        Matrix Q = seeds[order[k].second];
        if (order[k].first > target) {
            Q = givens_sweep(obj, Q);
            Q = refine_rotation(obj, Q, target);
        }
        LimitingCertificate cert;
        cert.sub_partition = obj.partition();
        cert.Q = Q;
        cert.xi = xi_pair(cert.sub_partition, obj.free_block(Q));
        double r = beta_certificate_residual(A, N, cert);
        if (r < best.residual) {
            best.residual = r;
            best.Q = Q;
            best.free_block = cert.xi.free_block;
        }
        if (best.residual <= target)
            break;
    }
    return best;
}

inline LimitingCertificate make_certificate(const BetaSubPartition &part,
                                            const Matrix &Q,
                                            const Matrix &free_block,
                                            double residual) {
    LimitingCertificate cert;
    cert.sub_partition = part;
    cert.Q = Q;
    cert.xi = xi_pair(part, free_block);
    cert.residual_beta = residual;
    return cert;
}

} // namespace detail

/// Limiting normal cone test. Outside the beta-beta block the conditions are
/// linear and checked exactly; the beta-beta block needs a certificate
/// (sub-partition, Q, Xi1). For |beta| <= 1 the certificate question is
/// decided exactly; for |beta| >= 2 a failed search yields search_exhausted.
inline MembershipVerdict
limiting_normal_membership(const GraphPoint &pt, const Matrix &G,
                           const Matrix &H, const LimitingOptions &opt = {}) {
    MembershipVerdict v;
    v.residuals = limiting_linear_residuals(pt, G, H);
    const double thr = opt.tol * (1 + pair_norm(G, H));
    for (const auto &[k, r] : v.residuals)
        v.tolerances[k] = thr;

    const auto &beta = pt.partition().beta;
    const Index b = static_cast<Index>(beta.size());
    if (b == 0) {
        v.residuals["beta_certificate"] = 0;
        v.tolerances["beta_certificate"] = thr;
        settle(v);
        if (v.member())
            v.certificate = detail::make_certificate({}, Matrix(0, 0),
                                                     Matrix(0, 0), 0);
        return v;
    }

    Matrix Gt = pt.svd().to_frame(G), Ht = pt.svd().to_frame(H);
    Matrix M = Gt(beta, beta), N = Ht(beta, beta);
    v.residuals["beta_symmetry"] = skew_part(N).norm();
    v.tolerances["beta_symmetry"] = thr;
    v.tolerances["beta_certificate"] = thr;

    settle(v);
    if (!v.member()) {
        v.residuals["beta_certificate"] =
            std::numeric_limits<double>::quiet_NaN();
        v.notes.push_back("linear conditions fail; certificate not searched");
        v.state = VerdictState::non_member;
        return v;
    }

    Matrix A = sym_part(M), Ns = sym_part(N);
    if (b == 1) {
        // Branch order: beta0, beta+, beta-.
        const double a = A(0, 0), n = Ns(0, 0);
        struct Branch {
            detail::Composition c;
            double r;
        };
        Branch branches[] = {{{0, 1, 0}, std::max(0.0, a) + std::max(0.0, -n)},
                             {{1, 0, 0}, std::abs(a)},
                             {{0, 0, 1}, std::abs(n)}};
        const Branch *best = &branches[0];
        for (const Branch &br : branches)
            if (br.r < best->r)
                best = &br;
        v.residuals["beta_certificate"] = best->r;
        settle(v);
        if (v.member())
            v.certificate = detail::make_certificate(
                detail::contiguous_partition(best->c), Matrix::Identity(1, 1),
                Matrix(best->c.plus, best->c.minus), best->r);
        v.notes.push_back("|beta| = 1: exact three-branch enumeration");
        return v;
    }

    const auto comps = detail::compositions(b);
    std::vector<detail::CompositionResult> results(comps.size());
    const double target = thr * 1e-3;
    parallel_for(
        comps.size(),
        [&](std::size_t i) {
            results[i] = detail::search_composition(
                A, Ns, comps[i], target, opt.budget,
                derive_seed(opt.seed, static_cast<std::uint64_t>(i)));
        },
        opt.threads);

    size_t best = 0;
    for (size_t i = 1; i < results.size(); ++i)
        if (results[i].residual < results[best].residual)
            best = i;
    const auto &br = results[best];
    LimitingCertificate cert = detail::make_certificate(
        br.partition, br.Q, br.free_block, br.residual);
    // Recheck against the unsymmetrized blocks.
    cert.residual_beta = beta_certificate_residual(M, N, cert);
    v.residuals["beta_certificate"] = cert.residual_beta;
    settle(v);
    if (v.member()) {
        v.certificate = cert;
    } else {
        v.state = VerdictState::search_exhausted;
        v.notes.push_back("no certificate found within budget " +
                          std::to_string(opt.budget) +
                          "; this does not prove non-membership");
    }
    return v;
}

} // namespace nucnorm
