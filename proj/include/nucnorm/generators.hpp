#pragma once

#include "limiting.hpp"
#include "random.hpp"

namespace nucnorm {

/// Spectral regimes for random graph points.
enum class Regime {
    interior, // all singular values below one
    boundary, // at least one singular value equal to one
    alpha,    // every singular value above one
    mixed,    // random split, beta may be empty
};

inline Regime parse_regime(const std::string &s) {
    if (s == "interior") return Regime::interior;
    if (s == "boundary") return Regime::boundary;
    if (s == "alpha") return Regime::alpha;
    if (s == "mixed") return Regime::mixed;
    throw std::invalid_argument("unknown regime: " + s);
}

struct SpectrumShape {
    Index alpha = 0, beta = 0, gamma = 0;
    /// Force a repeated value inside alpha and inside gamma when possible.
    bool repeated = false;
};

/// Non-increasing spectrum: alpha in [1.2, 3], beta exactly 1, gamma in
/// [0.05, 0.8].
inline Vector random_spectrum(const SpectrumShape &s, Rng &rng) {
    std::vector<double> a, g;
    for (Index i = 0; i < s.alpha; ++i)
        a.push_back(uniform(rng, 1.2, 3.0));
    for (Index i = 0; i < s.gamma; ++i)
        g.push_back(uniform(rng, 0.05, 0.8));
    if (s.repeated) {
        if (a.size() >= 2)
            a[1] = a[0];
        if (g.size() >= 2)
            g[1] = g[0];
    }
    std::sort(a.rbegin(), a.rend());
    std::sort(g.rbegin(), g.rend());
    Vector out(s.alpha + s.beta + s.gamma);
    Index k = 0;
    for (double v : a)
        out(k++) = v;
    for (Index i = 0; i < s.beta; ++i)
        out(k++) = 1.0;
    for (double v : g)
        out(k++) = v;
    return out;
}

inline SpectrumShape shape_for(Regime r, Index m, Index n_beta, Rng &rng) {
    SpectrumShape s;
    switch (r) {
    case Regime::interior:
        s.gamma = m;
        break;
    case Regime::alpha:
        s.alpha = m;
        break;
    case Regime::boundary:
    case Regime::mixed: {
        Index b = std::min(m, n_beta);
        if (r == Regime::boundary)
            b = std::max<Index>(b, 1);
        s.beta = b;
        s.alpha = uniform_index(rng, 0, m - b);
        s.gamma = m - b - s.alpha;
        break;
    }
    }
    return s;
}

struct GraphSample {
    Matrix X, Y;
    SpectralDecomposition svd; // the generating decomposition of X + Y
};

/// (X, Y) = (Z - Pi_B(Z), Pi_B(Z)) for Z = U [Diag(sigma) 0] V^T with Haar U, V.
inline GraphSample graph_point_from_spectrum(const Vector &sigma, Index n,
                                             Rng &rng) {
    const Index m = sigma.size();
    if (n < m)
        throw std::invalid_argument("graph_point_from_spectrum: n < m");
    GraphSample s;
    s.svd = {haar_orthogonal(m, rng), sigma, haar_orthogonal(n, rng)};
    Matrix V1 = s.svd.V.leftCols(m);
    Vector excess = (sigma.array() - 1).cwiseMax(0.0);
    Vector clipped = sigma.cwiseMin(1.0);
    s.X = s.svd.U * excess.asDiagonal() * V1.transpose();
    s.Y = s.svd.U * clipped.asDiagonal() * V1.transpose();
    return s;
}

inline GraphSample random_graph_point(Index m, Index n, Regime r, Index n_beta,
                                      Rng &rng, bool repeated = false) {
    SpectrumShape s = shape_for(r, m, n_beta, rng);
    s.repeated = repeated;
    return graph_point_from_spectrum(random_spectrum(s, rng), n, rng);
}

/// (W - Pi_B'(W), Pi_B'(W)) for a unit Gaussian W, a tangent direction.
inline std::pair<Matrix, Matrix> tangent_direction(const GraphPoint &pt,
                                                   Rng &rng) {
    Matrix W = gaussian_matrix(pt.m(), pt.n(), rng);
    W /= W.norm();
    Matrix D = dir_derivative_value(pt.frame, W);
    return {W - D, D};
}

/// Random PSD matrix of random rank.
inline Matrix random_psd(Index b, Rng &rng) {
    Index r = uniform_index(rng, 0, b);
    Matrix B = gaussian_matrix(b, r, rng);
    return B * B.transpose();
}

namespace detail {

/// Overwrites entries of the framed pair so every regular-cone condition
/// outside the beta-beta block holds. Y~ is kept wherever it is free.
inline void repair_linear(const SpectralFrame &f, Matrix &Xt, Matrix &Yt) {
    const Index m = f.m(), n = f.n();
    std::vector<int> cls(static_cast<size_t>(m), 0);
    for (Index i : f.partition.beta)
        cls[static_cast<size_t>(i)] = 1;
    for (Index i : f.partition.gamma)
        cls[static_cast<size_t>(i)] = 2;
    const auto &x = f.aux;
    auto ratio = [](double w) { return -w / (1 - w); };

    for (Index i = 0; i < m; ++i) {
        int ci = cls[static_cast<size_t>(i)];
        if (ci == 0)
            Xt(i, i) = 0;
        if (ci == 2)
            Yt(i, i) = 0;
        for (Index j = i + 1; j < m; ++j) {
            int lo = std::min(ci, cls[static_cast<size_t>(j)]);
            int hi = std::max(ci, cls[static_cast<size_t>(j)]);
            if (lo == 1 && hi == 1)
                continue;
            if (lo >= 1) {
                Yt(i, j) = Yt(j, i) = 0;
                continue;
            }
            double sy = (Yt(i, j) + Yt(j, i)) / 2, ky = (Yt(i, j) - Yt(j, i)) / 2;
            double sx = hi == 2 ? ratio(x.omega1(i, j)) * sy : 0.0;
            double kx = ratio(x.omega2(i, j)) * ky;
            Xt(i, j) = sx + kx;
            Xt(j, i) = sx - kx;
        }
        for (Index j = m; j < n; ++j) {
            if (ci == 0)
                Xt(i, j) = ratio(x.omega3(i, j - m)) * Yt(i, j);
            else
                Yt(i, j) = 0;
        }
    }
}

} // namespace detail

/// A random element of the regular normal cone at the point.
inline std::pair<Matrix, Matrix> regular_candidate(const GraphPoint &pt,
                                                   Rng &rng) {
    const SpectralFrame &f = pt.frame;
    Matrix Xt = gaussian_matrix(f.m(), f.n(), rng);
    Matrix Yt = gaussian_matrix(f.m(), f.n(), rng);
    detail::repair_linear(f, Xt, Yt);
    const auto &b = f.partition.beta;
    if (!b.empty()) {
        const Index nb = static_cast<Index>(b.size());
        Matrix K = gaussian_matrix(nb, nb, rng);
        Xt(b, b) = -random_psd(nb, rng) + skew_part(K);
        Yt(b, b) = random_psd(nb, rng);
    }
    return {pt.svd().from_frame(Xt), pt.svd().from_frame(Yt)};
}

struct LimitingSample {
    Matrix G, H;
    LimitingCertificate cert;
};

/// A random element of the limiting normal cone together with the
/// certificate it was built from.
inline LimitingSample limiting_candidate(const GraphPoint &pt, Rng &rng) {
    const SpectralFrame &f = pt.frame;
    const auto &beta = f.partition.beta;
    const Index b = static_cast<Index>(beta.size());
    Matrix Xt = gaussian_matrix(f.m(), f.n(), rng);
    Matrix Yt = gaussian_matrix(f.m(), f.n(), rng);
    detail::repair_linear(f, Xt, Yt);

    LimitingSample s;
    auto comps = detail::compositions(b);
    auto c = comps[static_cast<size_t>(
        uniform_index(rng, 0, static_cast<Index>(comps.size()) - 1))];
    BetaSubPartition part = detail::contiguous_partition(c);
    Matrix T(c.plus, c.minus);
    for (Index i = 0; i < c.plus; ++i)
        for (Index j = 0; j < c.minus; ++j) {
            Index kind = uniform_index(rng, 0, 2);
            T(i, j) = kind == 0 ? 0.0 : kind == 1 ? 1.0 : uniform(rng, 0.2, 0.8);
        }
    Matrix Q = haar_orthogonal(b, rng);

    Matrix A = sym_part(gaussian_matrix(b, b, rng));
    Matrix N = sym_part(gaussian_matrix(b, b, rng));
    const auto &P = part.plus, &Z = part.zero, &M = part.minus;
    A(P, P).setZero();
    A(P, Z).setZero();
    A(Z, P).setZero();
    N(Z, M).setZero();
    N(M, Z).setZero();
    N(M, M).setZero();
    if (!Z.empty()) {
        A(Z, Z) = -random_psd(c.zero, rng);
        N(Z, Z) = random_psd(c.zero, rng);
    }
    for (Index i = 0; i < c.plus; ++i)
        for (Index j = 0; j < c.minus; ++j) {
            Index pi = P[static_cast<size_t>(i)], mj = M[static_cast<size_t>(j)];
            double t = T(i, j);
            if (t == 0)
                A(pi, mj) = 0;
            else if (t == 1)
                N(pi, mj) = 0;
            else
                A(pi, mj) = -t / (1 - t) * N(pi, mj);
            A(mj, pi) = A(pi, mj);
            N(mj, pi) = N(pi, mj);
        }

    if (b > 0) {
        Matrix K = gaussian_matrix(b, b, rng);
        Xt(beta, beta) = Q * A * Q.transpose() + skew_part(K);
        Yt(beta, beta) = Q * N * Q.transpose();
    }
    s.G = pt.svd().from_frame(Xt);
    s.H = pt.svd().from_frame(Yt);
    s.cert.sub_partition = part;
    s.cert.Q = Q;
    s.cert.xi = xi_pair(part, T);
    return s;
}

inline std::pair<Matrix, Matrix> random_candidate(Index m, Index n, Rng &rng) {
    return {gaussian_matrix(m, n, rng), gaussian_matrix(m, n, rng)};
}

/// Another valid SVD of the same matrix: independent orthogonal rotations
/// inside every cluster of equal positive singular values, independent left
/// and right rotations on the zero cluster, and a rotation of the trailing
/// right singular vectors.
inline SpectralDecomposition rotate_within_clusters(const SpectralDecomposition &d,
                                                    Rng &rng,
                                                    double cluster_tol = 1e-10) {
    SpectralDecomposition r = d;
    const Index m = d.rows(), n = d.cols();
    Index i = 0;
    while (i < m) {
        Index j = i + 1;
        while (j < m && std::abs(d.sigma(j) - d.sigma(i)) <=
                            cluster_tol * std::max(1.0, d.sigma(i)))
            ++j;
        const Index len = j - i;
        if (d.sigma(i) <= cluster_tol) {
            r.U.middleCols(i, len) = d.U.middleCols(i, len) * haar_orthogonal(len, rng);
            r.V.middleCols(i, len) = d.V.middleCols(i, len) * haar_orthogonal(len, rng);
        } else if (len > 1) {
            Matrix R = haar_orthogonal(len, rng);
            r.U.middleCols(i, len) = d.U.middleCols(i, len) * R;
            r.V.middleCols(i, len) = d.V.middleCols(i, len) * R;
        }
        i = j;
    }
    if (n > m)
        r.V.rightCols(n - m) = d.V.rightCols(n - m) * haar_orthogonal(n - m, rng);
    return r;
}

} // namespace nucnorm
