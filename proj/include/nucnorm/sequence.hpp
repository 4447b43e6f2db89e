#pragma once

#include "limiting.hpp"

#include <queue>

namespace nucnorm {

/// One term of a sequence of graph points and regular normals converging to
/// a limiting normal.
struct SequenceTerm {
    Matrix Xk, Yk, Gk, Hk;
    /// Singular values of Xk + Yk in the rotated frame (not sorted).
    Vector z;
    Matrix U_hat, V_hat;
    /// Distance of each beta+ / beta- singular value from one.
    Vector plus_deviation, minus_deviation;
};

namespace detail {

/// Scale a_i, b_j and level l of the deviations 1 + a_i k^-l (beta+) and
/// 1 - b_j k^-l (beta-), chosen so that b_j / (a_i + b_j) tends to the free
/// entry t_ij of Xi1.
struct DeviationPlan {
    std::vector<double> coef;
    std::vector<int> level;
};

inline DeviationPlan plan_deviations(const Matrix &T) {
    const Index p = T.rows(), q = T.cols();
    const Index nodes = p + q;
    const double edge = 1e-12;
    auto interior = [&](Index i, Index j) {
        return T(i, j) > edge && T(i, j) < 1 - edge;
    };

    DeviationPlan plan;
    plan.coef.assign(static_cast<size_t>(nodes), 0.0);
    std::vector<int> comp(static_cast<size_t>(nodes), -1);
    int ncomp = 0;
    for (Index root = 0; root < nodes; ++root) {
        if (comp[static_cast<size_t>(root)] >= 0)
            continue;
        std::vector<Index> members;
        std::queue<Index> bfs;
        comp[static_cast<size_t>(root)] = ncomp;
        plan.coef[static_cast<size_t>(root)] = 1.0;
        bfs.push(root);
        while (!bfs.empty()) {
            Index u = bfs.front();
            bfs.pop();
            members.push_back(u);
            for (Index w = 0; w < nodes; ++w) {
                bool u_plus = u < p, w_plus = w < p;
                if (u_plus == w_plus)
                    continue;
                Index i = u_plus ? u : w, j = (u_plus ? w : u) - p;
                if (!interior(i, j))
                    continue;
                double t = T(i, j);
                // coef(minus j) / coef(plus i) = t / (1 - t)
                double want = u_plus ? plan.coef[static_cast<size_t>(u)] * t / (1 - t)
                                     : plan.coef[static_cast<size_t>(u)] * (1 - t) / t;
                auto ws = static_cast<size_t>(w);
                if (comp[ws] < 0) {
                    comp[ws] = ncomp;
                    plan.coef[ws] = want;
                    bfs.push(w);
                } else if (std::abs(plan.coef[ws] - want) > 1e-9 * want) {
                    throw std::invalid_argument(
                        "construct_sequence: free block is not realizable by "
                        "a single deviation sequence");
                }
            }
        }
        double mx = 0;
        for (Index u : members)
            mx = std::max(mx, plan.coef[static_cast<size_t>(u)]);
        for (Index u : members)
            plan.coef[static_cast<size_t>(u)] /= mx;
        ++ncomp;
    }

    // Strict order between components from the 0/1 entries.
    std::vector<std::pair<int, int>> order;
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < q; ++j) {
            if (interior(i, j))
                continue;
            int ci = comp[static_cast<size_t>(i)];
            int cj = comp[static_cast<size_t>(p + j)];
            if (ci == cj)
                throw std::invalid_argument(
                    "construct_sequence: contradictory free block");
            if (T(i, j) <= edge)
                order.emplace_back(ci, cj); // minus side decays faster
            else
                order.emplace_back(cj, ci);
        }
    std::vector<int> lvl(static_cast<size_t>(ncomp), 1);
    for (int it = 0;; ++it) {
        bool changed = false;
        for (auto [from, to] : order)
            if (lvl[static_cast<size_t>(to)] < lvl[static_cast<size_t>(from)] + 1) {
                lvl[static_cast<size_t>(to)] = lvl[static_cast<size_t>(from)] + 1;
                changed = true;
            }
        if (!changed)
            break;
        if (it > ncomp)
            throw std::invalid_argument(
                "construct_sequence: cyclic decay order in free block");
    }
    plan.level.resize(static_cast<size_t>(nodes));
    for (Index u = 0; u < nodes; ++u)
        plan.level[static_cast<size_t>(u)] =
            lvl[static_cast<size_t>(comp[static_cast<size_t>(u)])];
    return plan;
}

/// Enforces w h + (1 - w) g = 0 by moving the component with the smaller
/// coefficient.
inline void solve_pair(double w, double &g, double &h) {
    if (w >= 0.5)
        h = -(1 - w) / w * g;
    else
        g = -w / (1 - w) * h;
}

} // namespace detail

/// Builds the k-th term of a sequence (X^k, Y^k) -> (X, Y) on the graph with
/// regular normals (G^k, H^k) -> (G, H), given a limiting certificate for
/// (G, H). Requires k >= 2.
inline SequenceTerm construct_sequence(const GraphPoint &pt, const Matrix &G,
                                       const Matrix &H,
                                       const LimitingCertificate &cert, int k,
                                       double tol = 1e-8) {
    if (k < 2)
        throw std::invalid_argument("construct_sequence: k must be >= 2");
    require_same_shape(pt.X, G, "construct_sequence");
    require_same_shape(pt.X, H, "construct_sequence");
    const auto &part = pt.partition();
    const auto &beta = part.beta;
    const Index m = pt.m(), n = pt.n();
    const Index b = static_cast<Index>(beta.size());
    const double scale = 1 + pair_norm(G, H);

    const Tolerances &tols = pt.tol();
    validate_certificate(cert, b, tols);
    for (const auto &[key, r] : limiting_linear_residuals(pt, G, H))
        if (r > tol * scale)
            throw std::invalid_argument("construct_sequence: (G, H) fails " +
                                        key);
    Matrix Gt0 = pt.svd().to_frame(G), Ht0 = pt.svd().to_frame(H);
    if (b > 0) {
        Matrix M = Gt0(beta, beta), N = Ht0(beta, beta);
        if (skew_part(N).norm() > tol * scale ||
            beta_certificate_residual(M, N, cert) > tol * scale)
            throw std::invalid_argument(
                "construct_sequence: certificate inconsistent with (G, H)");
    }

    const auto &sp = cert.sub_partition;
    detail::DeviationPlan plan = detail::plan_deviations(cert.xi.free_block);
    const Index np = static_cast<Index>(sp.plus.size());
    const Index nm = static_cast<Index>(sp.minus.size());

    SequenceTerm out;
    out.z = pt.frame.sigma_eff;
    out.plus_deviation.resize(np);
    out.minus_deviation.resize(nm);
    // 0: alpha', 1: beta', 2: gamma'
    std::vector<int> cls(static_cast<size_t>(m), 0);
    for (Index i : part.gamma)
        cls[static_cast<size_t>(i)] = 2;
    for (Index pos : sp.zero)
        cls[static_cast<size_t>(beta[static_cast<size_t>(pos)])] = 1;
    for (Index r = 0; r < np + nm; ++r) {
        double dev = plan.coef[static_cast<size_t>(r)] *
                     std::pow(static_cast<double>(k),
                              -plan.level[static_cast<size_t>(r)]);
        if (dev < 10 * tols.one)
            throw NumericError(
                "construct_sequence: deviation below the classification "
                "tolerance; increase tol_one or decrease k");
        bool plus = r < np;
        Index pos = plus ? sp.plus[static_cast<size_t>(r)]
                         : sp.minus[static_cast<size_t>(r - np)];
        Index idx = beta[static_cast<size_t>(pos)];
        out.z(idx) = plus ? 1 + dev : 1 - dev;
        cls[static_cast<size_t>(idx)] = plus ? 0 : 2;
        if (plus)
            out.plus_deviation(r) = dev;
        else
            out.minus_deviation(r - np) = dev;
    }

    out.U_hat = pt.svd().U;
    out.V_hat = pt.svd().V;
    if (b > 0) {
        out.U_hat(Eigen::all, beta) = pt.svd().U(Eigen::all, beta) * cert.Q;
        out.V_hat(Eigen::all, beta) = pt.svd().V(Eigen::all, beta) * cert.Q;
    }
    Vector excess = (out.z.array() - 1).cwiseMax(0.0);
    Vector clipped = out.z.cwiseMin(1.0);
    Matrix V1 = out.V_hat.leftCols(m);
    out.Xk = out.U_hat * excess.asDiagonal() * V1.transpose();
    out.Yk = out.U_hat * clipped.asDiagonal() * V1.transpose();

    Matrix Gh = out.U_hat.transpose() * G * out.V_hat;
    Matrix Hh = out.U_hat.transpose() * H * out.V_hat;
    OmegaMatrices om = detail::omega_unsorted(out.z, n);
    double dropped = 0;
    auto drop = [&](double &h) {
        dropped += h * h;
        h = 0;
    };

    for (Index i = 0; i < m; ++i) {
        if (cls[static_cast<size_t>(i)] == 2)
            drop(Hh(i, i));
        for (Index j = i + 1; j < m; ++j) {
            int lo = std::min(cls[static_cast<size_t>(i)], cls[static_cast<size_t>(j)]);
            int hi = std::max(cls[static_cast<size_t>(i)], cls[static_cast<size_t>(j)]);
            if (lo >= 1 && hi == 2) {
                drop(Hh(i, j));
                drop(Hh(j, i));
                continue;
            }
            if (lo == 1)
                continue;
            double sg = (Gh(i, j) + Gh(j, i)) / 2, kg = (Gh(i, j) - Gh(j, i)) / 2;
            double sh = (Hh(i, j) + Hh(j, i)) / 2, kh = (Hh(i, j) - Hh(j, i)) / 2;
            detail::solve_pair(om.omega2(i, j), kg, kh);
            if (hi == 2)
                detail::solve_pair(om.omega1(i, j), sg, sh);
            Gh(i, j) = sg + kg;
            Gh(j, i) = sg - kg;
            Hh(i, j) = sh + kh;
            Hh(j, i) = sh - kh;
        }
        for (Index j = m; j < n; ++j) {
            if (cls[static_cast<size_t>(i)] == 0)
                detail::solve_pair(om.omega3(i, j - m), Gh(i, j), Hh(i, j));
            else
                drop(Hh(i, j));
        }
    }
    if (std::sqrt(dropped) > 10 * tol * scale)
        throw std::invalid_argument(
            "construct_sequence: entries forced to zero are not small");

    out.Gk = out.U_hat * Gh * out.V_hat.transpose();
    out.Hk = out.U_hat * Hh * out.V_hat.transpose();
    return out;
}

} // namespace nucnorm
