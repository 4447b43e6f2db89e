#pragma once

#include <nucnorm/nucnorm.hpp>

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace nucnorm::acceptance {

struct Result {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Config {
    /// Multiplies every instance count (1 = full suite).
    double scale = 1.0;
    std::uint64_t seed = 20261015;
    unsigned threads = 0;
};

// Pinned tolerances.
inline constexpr double kFdFloor = 1e-10;
inline constexpr double kFdSlack = 5.0;
inline constexpr double kFdMinOrder = 0.9;
inline constexpr double kCalmFloor = 1e-12;
inline constexpr double kCalmSpread = 10.0;
inline constexpr double kDiagExact = 1e-12;
inline constexpr double kGraphTol = 1e-8;
inline constexpr double kDecayRatio = 0.1;
inline constexpr double kRejectResidual = 0.1;
inline constexpr double kRejectRatio = 1e-3;
inline constexpr double kProbeAccept = 1e-8;
inline constexpr double kProbeReject = 1e-3;
inline constexpr Index kProbeSamples = 10000;
inline constexpr double kSequenceTol = 1e-7;
inline constexpr double kFrameResidual = 1e-7;
inline constexpr double kFrameDerivative = 1e-8;
inline constexpr double kAdjointTol = 1e-8;

namespace detail {

inline Index count(Index full, const Config &c) {
    return std::max<Index>(1, static_cast<Index>(std::llround(full * c.scale)));
}

inline std::string fmt(const char *f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

inline Rng stream(const Config &c, int criterion, Index item) {
    return Rng(derive_seed(c.seed, static_cast<std::uint64_t>(criterion) * 1000003ULL +
                                       static_cast<std::uint64_t>(item)));
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
    const size_t k = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < k; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= k;
    my /= k;
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < k; ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

struct Instance12 {
    Matrix Zbar;
    std::vector<Matrix> H;
};

/// Shared corpus for the derivative criteria: four regimes in rotation
/// (beta empty, |beta| = 1, |beta| = 2, repeated values inside alpha and
/// gamma), five unit directions each.
inline Instance12 derivative_instance(const Config &c, Index item) {
    Rng rng = stream(c, 12, item);
    SpectrumShape s;
    Index m = 0;
    switch (item % 4) {
    case 0:
        m = uniform_index(rng, 1, 5);
        s.alpha = uniform_index(rng, 0, m);
        s.gamma = m - s.alpha;
        break;
    case 1:
        m = uniform_index(rng, 1, 5);
        s.beta = 1;
        s.alpha = uniform_index(rng, 0, m - 1);
        s.gamma = m - 1 - s.alpha;
        break;
    case 2:
        m = uniform_index(rng, 2, 5);
        s.beta = 2;
        s.alpha = uniform_index(rng, 0, m - 2);
        s.gamma = m - 2 - s.alpha;
        break;
    default:
        m = uniform_index(rng, 4, 5);
        s.alpha = 2;
        s.gamma = m - 2;
        s.repeated = true;
        break;
    }
    Index n = uniform_index(rng, m, 6);
    Vector sigma = random_spectrum(s, rng);
    Matrix U = haar_orthogonal(m, rng), V = haar_orthogonal(n, rng);
    Instance12 inst{U * sigma.asDiagonal() * V.leftCols(m).transpose(), {}};
    for (int k = 0; k < 5; ++k) {
        Matrix H = gaussian_matrix(m, n, rng);
        inst.H.push_back(H / H.norm());
    }
    return inst;
}

} // namespace detail

inline Result criterion1(const Config &c) {
    const Index N = detail::count(200, c);
    const auto grid = default_t_grid();
    struct Out {
        int fails = 0, exact = 0;
        double worst_order = 10, worst_ratio = 0;
    };
    std::vector<Out> outs(static_cast<size_t>(N));
    parallel_for(static_cast<size_t>(N), [&](size_t i) {
        auto inst = detail::derivative_instance(c, static_cast<Index>(i));
        Out &o = outs[i];
        SpectralFrame f = make_frame(inst.Zbar);
        for (const Matrix &H : inst.H) {
            Matrix D = dir_derivative_value(f, H);
            auto q = fd_dir_derivative(inst.Zbar, H, grid);
            std::vector<double> ts, es;
            for (size_t k = 0; k < grid.size(); ++k) {
                double e = (q[k] - D).norm();
                if (e > kFdFloor) {
                    ts.push_back(grid[k]);
                    es.push_back(e);
                }
            }
            if (ts.size() < 2) {
                ++o.exact;
                continue;
            }
            double num = 0, den = 0;
            for (size_t k = 0; k < ts.size(); ++k) {
                num += es[k] * ts[k];
                den += ts[k] * ts[k];
            }
            double C = num / den;
            bool ok = std::isfinite(C);
            for (size_t k = 0; k < ts.size(); ++k) {
                double ratio = es[k] / (C * ts[k]);
                o.worst_ratio = std::max(o.worst_ratio, ratio);
                if (ratio > kFdSlack)
                    ok = false;
            }
            double order = detail::loglog_slope(ts, es);
            o.worst_order = std::min(o.worst_order, order);
            if (order < kFdMinOrder)
                ok = false;
            if (!ok)
                ++o.fails;
        }
    });
    Out tot;
    for (const Out &o : outs) {
        tot.fails += o.fails;
        tot.exact += o.exact;
        tot.worst_order = std::min(tot.worst_order, o.worst_order);
        tot.worst_ratio = std::max(tot.worst_ratio, o.worst_ratio);
    }
    Result r{1, "directional derivative vs finite differences", tot.fails == 0, ""};
    r.detail = std::to_string(N * 5) + " pairs, " + std::to_string(tot.fails) +
               " failures, " + std::to_string(tot.exact) +
               " exact below floor, min order " + detail::fmt("%.3f", tot.worst_order) +
               ", max err/(C t) " + detail::fmt("%.3f", tot.worst_ratio);
    return r;
}

inline Result criterion2(const Config &c) {
    const Index N = detail::count(200, c);
    const auto grid = default_t_grid();
    std::vector<int> fails(static_cast<size_t>(N), 0);
    std::vector<double> spread(static_cast<size_t>(N), 0);
    parallel_for(static_cast<size_t>(N), [&](size_t i) {
        auto inst = detail::derivative_instance(c, static_cast<Index>(i));
        for (const Matrix &H : inst.H) {
            std::vector<double> ratios;
            for (double t : grid) {
                double res = calmness_residual(inst.Zbar, t * H);
                if (res > kCalmFloor)
                    ratios.push_back(res / (t * t));
            }
            if (ratios.size() < 2)
                continue;
            std::vector<double> sorted = ratios;
            std::sort(sorted.begin(), sorted.end());
            size_t k = sorted.size();
            double median = k % 2 ? sorted[k / 2] : (sorted[k / 2 - 1] + sorted[k / 2]) / 2;
            double mx = sorted.back();
            spread[i] = std::max(spread[i], mx / median);
            if (mx > kCalmSpread * median)
                ++fails[i];
        }
    });

    // Diagonal instances: Zbar and H diagonal, entries chosen so that no
    // entry crosses +-1 along the sweep except from exactly +-1.
    const Index ND = detail::count(100, c);
    std::vector<double> diag_res(static_cast<size_t>(ND), 0);
    parallel_for(static_cast<size_t>(ND), [&](size_t i) {
        Rng rng = detail::stream(c, 2, static_cast<Index>(i));
        Index m = uniform_index(rng, 1, 5), n = uniform_index(rng, m, 6);
        Matrix Z = Matrix::Zero(m, n), H = Matrix::Zero(m, n);
        for (Index k = 0; k < m; ++k) {
            double sgn = uniform_index(rng, 0, 1) ? 1.0 : -1.0;
            switch (uniform_index(rng, 0, 2)) {
            case 0: Z(k, k) = sgn * uniform(rng, 1.2, 3.0); break;
            case 1: Z(k, k) = sgn; break;
            default: Z(k, k) = sgn * uniform(rng, 0.0, 0.8); break;
            }
            H(k, k) = uniform(rng, -1, 1);
        }
        H /= H.norm();
        for (double t : grid)
            diag_res[i] = std::max(diag_res[i], calmness_residual(Z, t * H));
    });
    int f = 0;
    double worst_spread = 0, worst_diag = 0;
    for (size_t i = 0; i < fails.size(); ++i) {
        f += fails[i];
        worst_spread = std::max(worst_spread, spread[i]);
    }
    int diag_fail = 0;
    for (double d : diag_res) {
        worst_diag = std::max(worst_diag, d);
        if (d > kDiagExact)
            ++diag_fail;
    }
    Result r{2, "calm B-differentiability", f == 0 && diag_fail == 0, ""};
    r.detail = std::to_string(N * 5) + " sweeps, " + std::to_string(f) +
               " with max/median > 10 (worst " + detail::fmt("%.3f", worst_spread) +
               "); " + std::to_string(ND) + " diagonal, max residual " +
               detail::fmt("%.2e", worst_diag);
    return r;
}

inline Result criterion3(const Config &c) {
    const Index N = detail::count(1000, c);
    struct Out {
        bool agree = true, member = false, expected_member = false;
    };
    std::vector<Out> outs(static_cast<size_t>(2 * N));
    parallel_for(static_cast<size_t>(2 * N), [&](size_t i) {
        Rng rng = detail::stream(c, 3, static_cast<Index>(i));
        Index m = uniform_index(rng, 1, 5), n = uniform_index(rng, m, 6);
        Regime reg = static_cast<Regime>(uniform_index(rng, 0, 3));
        GraphSample g = random_graph_point(m, n, reg, uniform_index(rng, 0, 2), rng);
        Matrix X = g.X, Y = g.Y;
        bool perturbed = static_cast<Index>(i) >= N;
        if (perturbed) {
            Matrix E = gaussian_matrix(m, n, rng);
            E /= E.norm();
            switch (i % 4) {
            case 0: Y *= 1.1; break;
            case 1: Y *= 0.9; break;
            case 2: Y += 0.1 * E; break;
            default: X += 0.1 * E; break;
            }
        }
        MembershipVerdict v = graph_membership(X, Y, kGraphTol);
        int passed = 0;
        for (const auto &[k, res] : v.residuals)
            passed += res <= v.tolerances.at(k);
        outs[i].agree = passed == 0 || passed == 3;
        outs[i].member = v.member();
        outs[i].expected_member = !perturbed;
    });
    int disagree = 0, member_rejected = 0, nonmembers = 0;
    for (const Out &o : outs) {
        disagree += !o.agree;
        if (o.expected_member && !o.member)
            ++member_rejected;
        if (!o.expected_member && !o.member)
            ++nonmembers;
    }
    Result r{3, "graph characterization equivalence",
             disagree == 0 && member_rejected == 0, ""};
    r.detail = std::to_string(N) + " members (" + std::to_string(member_rejected) +
               " rejected), " + std::to_string(N) + " perturbed (" +
               std::to_string(nonmembers) + " non-members), " +
               std::to_string(disagree) + " disagreements";
    return r;
}

inline Result criterion4(const Config &c) {
    const Index N = detail::count(500, c);
    const auto grid = default_t_grid();
    struct Out {
        bool ok = true;
        double ratio = 0;
    };
    std::vector<Out> tang(static_cast<size_t>(N)), rej(static_cast<size_t>(N));
    parallel_for(static_cast<size_t>(2 * N), [&](size_t i) {
        Rng rng = detail::stream(c, 4, static_cast<Index>(i));
        Index m = uniform_index(rng, 1, 5), n = uniform_index(rng, m, 6);
        Regime reg = static_cast<Regime>(uniform_index(rng, 0, 3));
        GraphSample g = random_graph_point(m, n, reg, uniform_index(rng, 0, 2), rng);
        GraphPoint pt = GraphPoint::make(g.X, g.Y);
        if (static_cast<Index>(i) < N) {
            auto [G, H] = tangent_direction(pt, rng);
            Out &o = tang[i];
            o.ok = tangent_membership(pt, G, H).member();
            auto d = graph_distance_probe(pt, G, H, grid);
            double first = d.front() / grid.front(), last = d.back() / grid.back();
            o.ratio = first > 1e-12 ? last / first : 0;
            if (o.ratio > kDecayRatio)
                o.ok = false;
        } else {
            Matrix G, H;
            MembershipVerdict v;
            do {
                G = gaussian_matrix(m, n, rng);
                H = gaussian_matrix(m, n, rng);
                double s = pair_norm(G, H);
                G /= s;
                H /= s;
                v = tangent_membership(pt, G, H);
            } while (v.residuals.at("tangent") < kRejectResidual);
            auto d = graph_distance_probe(pt, G, H, grid);
            Out &o = rej[i - static_cast<size_t>(N)];
            o.ratio = d.back() / grid.back();
            o.ok = o.ratio >= kRejectRatio;
        }
    });
    int tf = 0, rf = 0;
    double worst_t = 0, worst_r = 1e300;
    for (const Out &o : tang) {
        tf += !o.ok;
        worst_t = std::max(worst_t, o.ratio);
    }
    for (const Out &o : rej) {
        rf += !o.ok;
        worst_r = std::min(worst_r, o.ratio);
    }
    Result r{4, "tangent cone vs o(t) distance", tf == 0 && rf == 0, ""};
    r.detail = std::to_string(N) + " tangents (" + std::to_string(tf) +
               " failures, max decay " + detail::fmt("%.2e", worst_t) + "), " +
               std::to_string(N) + " rejected (" + std::to_string(rf) +
               " failures, min ratio " + detail::fmt("%.3f", worst_r) + ")";
    return r;
}

inline double max_residual(const MembershipVerdict &v) {
    double r = 0;
    for (const auto &[k, x] : v.residuals)
        if (std::isfinite(x))
            r = std::max(r, x);
    return r;
}

inline Result criterion5(const Config &c) {
    const Index N = detail::count(500, c);
    struct Out {
        bool ok = true;
        double violation = 0;
    };
    std::vector<Out> acc(static_cast<size_t>(N)), rej(static_cast<size_t>(N));
    parallel_for(static_cast<size_t>(2 * N), [&](size_t i) {
        Rng rng = detail::stream(c, 5, static_cast<Index>(i));
        Index m = uniform_index(rng, 1, 5), n = uniform_index(rng, m, 5);
        Regime reg = static_cast<Regime>(uniform_index(rng, 0, 3));
        GraphSample g = random_graph_point(m, n, reg, uniform_index(rng, 0, 3), rng);
        GraphPoint pt = GraphPoint::make(g.X, g.Y);
        if (static_cast<Index>(i) < N) {
            auto [Xs, Ys] = regular_candidate(pt, rng);
            Out &o = acc[i];
            o.ok = regular_normal_membership(pt, Xs, Ys).member();
            auto pr = proximal_inequality_probe(pt, Xs, Ys, kProbeSamples, rng());
            o.violation = pr.max_violation;
            o.ok = o.ok && pr.max_violation <= kProbeAccept;
        } else {
            Matrix Xs, Ys;
            for (;;) {
                if (i % 2) {
                    std::tie(Xs, Ys) = random_candidate(m, n, rng);
                } else {
                    std::tie(Xs, Ys) = regular_candidate(pt, rng);
                    Matrix E = gaussian_matrix(m, n, rng);
                    (uniform_index(rng, 0, 1) ? Xs : Ys) += 0.5 * E / E.norm();
                }
                if (max_residual(regular_normal_membership(pt, Xs, Ys)) >= kRejectResidual)
                    break;
            }
            auto pr = proximal_inequality_probe(pt, Xs, Ys, kProbeSamples, rng());
            Out &o = rej[i - static_cast<size_t>(N)];
            o.violation = pr.max_violation;
            o.ok = pr.max_violation >= kProbeReject;
        }
    });
    int af = 0, rf = 0;
    double worst_a = 0, worst_r = 1e300;
    for (const Out &o : acc) {
        af += !o.ok;
        worst_a = std::max(worst_a, o.violation);
    }
    for (const Out &o : rej) {
        rf += !o.ok;
        worst_r = std::min(worst_r, o.violation);
    }
    Result r{5, "regular cone vs proximal inequality", af == 0 && rf == 0, ""};
    r.detail = std::to_string(N) + " accepted (max violation " +
               detail::fmt("%.2e", worst_a) + "), " + std::to_string(N) +
               " rejected (min violation " + detail::fmt("%.3e", worst_r) + "), " +
               std::to_string(af + rf) + " failures";
    return r;
}

inline Result criterion6(const Config &c) {
    const Index N = detail::count(100, c);
    std::vector<int> wrong(static_cast<size_t>(N), 0);
    parallel_for(static_cast<size_t>(N), [&](size_t i) {
        Rng rng = detail::stream(c, 6, static_cast<Index>(i));
        Index m = uniform_index(rng, 1, 5), n = uniform_index(rng, m, 6);
        GraphSample g = random_graph_point(m, n, Regime::interior, 0, rng);
        GraphPoint pt = GraphPoint::make(g.X, g.Y);
        Matrix Xs = gaussian_matrix(m, n, rng), Ys = gaussian_matrix(m, n, rng);
        wrong[i] += !regular_normal_membership(pt, Xs, Matrix::Zero(m, n)).member();
        wrong[i] += regular_normal_membership(pt, Xs, Ys).member();
        wrong[i] += regular_normal_membership(pt, Xs, 1e-3 * Ys).member();
    });
    GraphPoint corner = GraphPoint::make(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
    Rng rng = detail::stream(c, 6, 1000000);
    int corner_wrong = 0;
    const Index NC = detail::count(100, c);
    for (Index k = 0; k < NC; ++k) {
        double x = uniform(rng, -2, 2), y = uniform(rng, -2, 2);
        if (k % 4 == 1)
            x = 0;
        if (k % 4 == 2)
            y = 0;
        bool oracle = x <= 0 && y >= 0;
        bool got = regular_normal_membership(corner, Matrix::Constant(1, 1, x),
                                             Matrix::Constant(1, 1, y))
                       .member();
        corner_wrong += got != oracle;
    }
    int w = 0;
    for (int x : wrong)
        w += x;
    Result r{6, "interior and 1x1 boundary closed forms", w == 0 && corner_wrong == 0, ""};
    r.detail = std::to_string(3 * N) + " interior candidates (" + std::to_string(w) +
               " disagreements), " + std::to_string(NC) + " corner candidates (" +
               std::to_string(corner_wrong) + " disagreements)";
    return r;
}

inline Result criterion7(const Config &) {
    GraphPoint corner = GraphPoint::make(Matrix::Zero(1, 1), Matrix::Ones(1, 1));
    int wrong = 0, exhausted = 0;
    for (int i = 0; i <= 40; ++i)
        for (int j = 0; j <= 40; ++j) {
            double g = (i - 20) / 10.0, h = (j - 20) / 10.0;
            bool oracle = h == 0 || g == 0 || (g <= 0 && h >= 0);
            auto v = limiting_normal_membership(corner, Matrix::Constant(1, 1, g),
                                                Matrix::Constant(1, 1, h));
            exhausted += v.state == VerdictState::search_exhausted;
            wrong += v.member() != oracle;
        }
    Result r{7, "1x1 limiting cone golden case", wrong == 0 && exhausted == 0, ""};
    r.detail = "41x41 grid, " + std::to_string(wrong) + " disagreements, " +
               std::to_string(exhausted) + " search-exhausted";
    return r;
}

inline Result criterion8(const Config &c) {
    const Index N = detail::count(100, c);
    const int ks[] = {10, 100, 1000};
    struct Out {
        bool ok = true;
        int attempts = 0;
        double C = 0;
        std::string why;
    };
    std::vector<Out> outs(static_cast<size_t>(N));
    parallel_for(
        static_cast<size_t>(N),
        [&](size_t i) {
            Rng rng = detail::stream(c, 8, static_cast<Index>(i));
            Out &o = outs[i];
            for (;;) {
                ++o.attempts;
                Index nb = uniform_index(rng, 1, 2);
                Index m = uniform_index(rng, nb, 4), n = uniform_index(rng, m, 5);
                GraphSample g = random_graph_point(m, n, Regime::boundary, nb, rng);
                GraphPoint pt = GraphPoint::make(g.X, g.Y);
                LimitingSample s = limiting_candidate(pt, rng);
                LimitingOptions opt;
                opt.seed = rng();
                opt.threads = 1;
                auto v = limiting_normal_membership(pt, s.G, s.H, opt);
                if (!v.member())
                    continue;
                std::vector<double> err;
                for (int k : ks) {
                    SequenceTerm t;
                    try {
                        t = construct_sequence(pt, s.G, s.H, *v.certificate, k);
                    } catch (const std::exception &e) {
                        o.ok = false;
                        o.why = e.what();
                        return;
                    }
                    if (!graph_membership(t.Xk, t.Yk, kGraphTol).member()) {
                        o.ok = false;
                        o.why = "sequence point off the graph";
                    }
                    GraphPoint pk = GraphPoint::make(t.Xk, t.Yk);
                    if (!regular_normal_membership(pk, t.Gk, t.Hk, kSequenceTol).member()) {
                        o.ok = false;
                        o.why = "sequence normal not regular";
                    }
                    err.push_back(pair_norm(t.Gk - s.G, t.Hk - s.H) +
                                  pair_norm(t.Xk - pt.X, t.Yk - pt.Y));
                }
                double num = 0, den = 0;
                for (size_t q = 0; q < err.size(); ++q) {
                    num += err[q] / ks[q];
                    den += 1.0 / (ks[q] * ks[q]);
                }
                o.C = num / den;
                for (size_t q = 0; q < err.size(); ++q)
                    if (!(err[q] <= 2 * o.C / ks[q] + 1e-10)) {
                        o.ok = false;
                        o.why = "convergence slower than C/k";
                    }
                return;
            }
        },
        c.threads);
    int f = 0, attempts = 0;
    double Cmax = 0;
    std::string why;
    for (const Out &o : outs) {
        f += !o.ok;
        attempts += o.attempts;
        Cmax = std::max(Cmax, o.C);
        if (!o.ok && why.empty())
            why = o.why;
    }
    Result r{8, "limiting normals as limits of regular normals", f == 0, ""};
    r.detail = std::to_string(N) + " accepted candidates (" + std::to_string(attempts) +
               " generated), " + std::to_string(f) + " failures, max C " +
               detail::fmt("%.3f", Cmax) + (why.empty() ? "" : "; first failure: " + why);
    return r;
}

inline Result criterion9(const Config &c) {
    const Index N = detail::count(100, c);
    struct Out {
        int mismatches = 0;
        double worst = 0;
    };
    std::vector<Out> outs(static_cast<size_t>(N));
    parallel_for(static_cast<size_t>(N), [&](size_t i) {
        Rng rng = detail::stream(c, 9, static_cast<Index>(i));
        SpectrumShape s;
        Index m = uniform_index(rng, 2, 5);
        switch (i % 3) {
        case 0: // repeated alpha
            s.alpha = 2;
            s.beta = uniform_index(rng, 0, m - 2);
            s.gamma = m - 2 - s.beta;
            break;
        case 1: // repeated gamma
            s.gamma = 2;
            s.beta = uniform_index(rng, 0, m - 2);
            s.alpha = m - 2 - s.beta;
            break;
        default: // |beta| = 2
            s.beta = 2;
            s.alpha = uniform_index(rng, 0, m - 2);
            s.gamma = m - 2 - s.alpha;
            break;
        }
        s.repeated = true;
        Index n = uniform_index(rng, m, 6);
        GraphSample g = graph_point_from_spectrum(random_spectrum(s, rng), n, rng);
        GraphPoint base = GraphPoint::make(g.X, g.Y);

        auto reg = regular_candidate(base, rng);
        auto rnd = random_candidate(m, n, rng);
        auto tan = tangent_direction(base, rng);
        auto lim = limiting_candidate(base, rng);
        Matrix H0 = gaussian_matrix(m, n, rng);

        struct Snapshot {
            std::vector<VerdictState> states;
            std::vector<double> residuals;
            Matrix D;
        };
        auto snap = [&](const GraphPoint &pt) {
            Snapshot sn;
            auto add = [&](const MembershipVerdict &v, bool skip_certificate) {
                sn.states.push_back(v.state);
                for (const auto &[k, x] : v.residuals)
                    if (!(skip_certificate && k == "beta_certificate"))
                        sn.residuals.push_back(x);
            };
            add(regular_normal_membership(pt, reg.first, reg.second), false);
            add(regular_normal_membership(pt, rnd.first, rnd.second), false);
            add(tangent_membership(pt, tan.first, tan.second), false);
            LimitingOptions opt;
            opt.threads = 1;
            add(limiting_normal_membership(pt, lim.G, lim.H, opt), true);
            add(limiting_normal_membership(pt, rnd.first, rnd.second, opt), true);
            sn.D = dir_derivative_value(pt.frame, H0);
            return sn;
        };
        Snapshot ref = snap(base);
        Out &o = outs[i];
        for (int r = 0; r < 5; ++r) {
            SpectralDecomposition rot = rotate_within_clusters(base.svd(), rng);
            Snapshot sn = snap(GraphPoint::with_frame(g.X, g.Y, rot));
            if (sn.states != ref.states)
                ++o.mismatches;
            for (size_t k = 0; k < ref.residuals.size(); ++k) {
                double a = ref.residuals[k], b = sn.residuals[k];
                if (std::isnan(a) && std::isnan(b))
                    continue;
                double d = std::abs(a - b);
                o.worst = std::max(o.worst, d);
                if (!(d <= kFrameResidual))
                    ++o.mismatches;
            }
            double dd = (sn.D - ref.D).norm();
            o.worst = std::max(o.worst, dd);
            if (dd > kFrameDerivative)
                ++o.mismatches;
        }
    });
    int mm = 0;
    double worst = 0;
    for (const Out &o : outs) {
        mm += o.mismatches;
        worst = std::max(worst, o.worst);
    }
    Result r{9, "frame invariance under re-decomposition", mm == 0, ""};
    r.detail = std::to_string(N) + " instances x 5 re-decompositions, " +
               std::to_string(mm) + " mismatches, max residual drift " +
               detail::fmt("%.2e", worst);
    return r;
}

inline Result criterion10(const Config &c) {
    const Index N = detail::count(100, c);
    struct Out {
        bool ok = true;
        double worst = 0;
    };
    std::vector<Out> outs(static_cast<size_t>(N));
    parallel_for(static_cast<size_t>(N), [&](size_t i) {
        Rng rng = detail::stream(c, 10, static_cast<Index>(i));
        Index m = uniform_index(rng, 1, 4), n = uniform_index(rng, m, 5);
        Regime reg = static_cast<Regime>(uniform_index(rng, 0, 3));
        if (reg == Regime::boundary)
            reg = Regime::alpha;
        GraphSample g = random_graph_point(m, n, reg, 0, rng);
        Matrix Z = g.X + g.Y;
        ProjectionGraphPoint pt = ProjectionGraphPoint::make(Z, g.Y);
        Matrix S = gaussian_matrix(m, n, rng);
        Matrix W = adjoint_coderivative(pt, S);
        Out &o = outs[i];
        LimitingOptions opt;
        opt.threads = 1;
        o.ok = coderivative_membership(pt, S, W, opt).member() &&
               regular_coderivative_membership(pt, S, W).member();
        Matrix E = gaussian_matrix(m, n, rng);
        o.ok = o.ok && !coderivative_membership(pt, S, W + 0.1 * E / E.norm(), opt).member();
        for (int k = 0; k < 100; ++k) {
            Matrix H = gaussian_matrix(m, n, rng);
            double lhs = dir_derivative_value(pt.graph.frame, H).cwiseProduct(S).sum();
            double rhs = H.cwiseProduct(W).sum();
            double d = std::abs(lhs - rhs) / (1 + S.norm() * H.norm());
            o.worst = std::max(o.worst, d);
            if (d > kAdjointTol)
                o.ok = false;
        }
    });
    int f = 0;
    double worst = 0;
    for (const Out &o : outs) {
        f += !o.ok;
        worst = std::max(worst, o.worst);
    }
    ProjectionGraphPoint one =
        ProjectionGraphPoint::make(Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    int grid_wrong = 0;
    for (int i = 0; i <= 40; ++i)
        for (int j = 0; j <= 40; ++j) {
            double s = (i - 20) / 10.0, w = (j - 20) / 10.0;
            Matrix S = Matrix::Constant(1, 1, s), W = Matrix::Constant(1, 1, w);
            bool lim = (w <= 0 && w >= s) || w == 0 || w == s;
            bool reg = w <= 0 && w >= s;
            grid_wrong += coderivative_membership(one, S, W).member() != lim;
            grid_wrong += regular_coderivative_membership(one, S, W).member() != reg;
        }
    Result r{10, "coderivative consistency", f == 0 && grid_wrong == 0, ""};
    r.detail = std::to_string(N) + " smooth points (" + std::to_string(f) +
               " failures, max adjoint gap " + detail::fmt("%.2e", worst) +
               "), 1x1 grid " + std::to_string(grid_wrong) + " disagreements";
    return r;
}

inline std::vector<std::function<Result(const Config &)>> all_criteria() {
    return {criterion1, criterion2, criterion3, criterion4, criterion5,
            criterion6, criterion7, criterion8, criterion9, criterion10};
}

inline std::string format(const Result &r) {
    return std::string(r.pass ? "PASS" : "FAIL") + "  criterion " +
           std::to_string(r.id) + ": " + r.name + " -- " + r.detail;
}

} // namespace nucnorm::acceptance
