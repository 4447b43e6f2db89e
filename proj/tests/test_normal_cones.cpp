#include <nucnorm/generators.hpp>
#include <nucnorm/normal_cones.hpp>

#include <gtest/gtest.h>

namespace nucnorm {
namespace {

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

Matrix row(double a, double b) {
    Matrix A(1, 2);
    A << a, b;
    return A;
}

LimitingCertificate scalar_certificate(int which) {
    BetaSubPartition p;
    if (which == 0)
        p.plus = {0};
    else if (which == 1)
        p.zero = {0};
    else
        p.minus = {0};
    LimitingCertificate c;
    c.sub_partition = p;
    c.Q = Matrix::Identity(1, 1);
    c.xi = xi_pair(p, Matrix(static_cast<Index>(p.plus.size()),
                             static_cast<Index>(p.minus.size())));
    return c;
}

TEST(RegularCone, InteriorPoint) {
    auto pt = GraphPoint::make(row(0, 0), row(0.5, 0));
    EXPECT_TRUE(regular_normal_membership(pt, row(1, -2), row(0, 0)).member());
    EXPECT_FALSE(regular_normal_membership(pt, row(0, 0), row(1, 0)).member());
}

TEST(RegularCone, UnitSingularValue) {
    auto pt = GraphPoint::make(scalar(0), scalar(1));
    EXPECT_TRUE(regular_normal_membership(pt, scalar(-1), scalar(2)).member());
    EXPECT_TRUE(regular_normal_membership(pt, scalar(0), scalar(0)).member());
    EXPECT_FALSE(regular_normal_membership(pt, scalar(1), scalar(0)).member());
    EXPECT_FALSE(regular_normal_membership(pt, scalar(0), scalar(-1)).member());
}

TEST(RegularCone, SkewPartOfBetaBlockIsFree) {
    Matrix Y = Matrix::Identity(2, 2);
    auto pt = GraphPoint::make(Matrix::Zero(2, 2), Y);
    Matrix K(2, 2);
    K << 0, 1, -1, 0;
    auto v = regular_normal_membership(pt, K, Matrix::Zero(2, 2));
    EXPECT_TRUE(v.member());
    EXPECT_FALSE(regular_normal_membership(pt, Matrix::Zero(2, 2), K).member());
}

TEST(RegularCone, ZeroIsAlwaysMember) {
    Rng rng(1);
    for (Regime r : {Regime::interior, Regime::alpha, Regime::boundary, Regime::mixed}) {
        auto s = random_graph_point(2, 3, r, 1, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        EXPECT_TRUE(regular_normal_membership(pt, Matrix::Zero(2, 3), Matrix::Zero(2, 3))
                        .member());
    }
}

TEST(RegularCone, PolarToTangents) {
    Rng rng(5);
    for (int k = 0; k < 40; ++k) {
        auto s = random_graph_point(3, 4, Regime::mixed, 1 + k % 3, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto [Xs, Ys] = regular_candidate(pt, rng);
        ASSERT_TRUE(regular_normal_membership(pt, Xs, Ys).member());
        for (int j = 0; j < 10; ++j) {
            auto [G, H] = tangent_direction(pt, rng);
            EXPECT_LE(Xs.cwiseProduct(G).sum() + Ys.cwiseProduct(H).sum(),
                      1e-10 * (1 + pair_norm(Xs, Ys)));
        }
    }
}

TEST(RegularCone, ClosedUnderNonNegativeCombinations) {
    Rng rng(6);
    for (int k = 0; k < 20; ++k) {
        auto s = random_graph_point(2, 4, Regime::boundary, 2, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto [X1, Y1] = regular_candidate(pt, rng);
        auto [X2, Y2] = regular_candidate(pt, rng);
        double a = uniform(rng, 0, 2), b = uniform(rng, 0, 2);
        EXPECT_TRUE(
            regular_normal_membership(pt, a * X1 + b * X2, a * Y1 + b * Y2).member());
    }
}

TEST(RegularCone, RandomPairsAreRejected) {
    Rng rng(8);
    for (int k = 0; k < 20; ++k) {
        auto s = random_graph_point(2, 3, Regime::mixed, 1, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto [Xs, Ys] = random_candidate(2, 3, rng);
        EXPECT_FALSE(regular_normal_membership(pt, Xs, Ys).member());
    }
}

TEST(Probe, ScalarExamples) {
    auto pt = GraphPoint::make(scalar(0), scalar(1));
    auto a = proximal_inequality_probe(pt, scalar(0), scalar(1), 10, 3);
    EXPECT_NEAR(a.max_violation, 0, 1e-15);
    auto b = proximal_inequality_probe(pt, scalar(1), scalar(0), 10, 3);
    EXPECT_NEAR(b.max_violation, 1, 1e-15);
    EXPECT_NEAR(b.worst_W(0, 0), 1, 1e-15);
}

TEST(Probe, AgreesWithMembership) {
    Rng rng(13);
    for (int k = 0; k < 20; ++k) {
        auto s = random_graph_point(2, 3, Regime::mixed, 1, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto [Xs, Ys] = regular_candidate(pt, rng);
        EXPECT_LE(proximal_inequality_probe(pt, Xs, Ys, 200, k).max_violation,
                  1e-10 * (1 + pair_norm(Xs, Ys)));
        auto [Xr, Yr] = random_candidate(2, 3, rng);
        EXPECT_GT(proximal_inequality_probe(pt, Xr, Yr, 200, k).max_violation, 1e-3);
    }
}

TEST(Probe, Rejections) {
    auto pt = GraphPoint::make(scalar(0), scalar(1));
    EXPECT_THROW(proximal_inequality_probe(pt, scalar(0), scalar(0), 0, 1),
                 std::invalid_argument);
    EXPECT_THROW(proximal_inequality_probe(pt, row(0, 0), row(0, 0), 1, 1),
                 std::invalid_argument);
}

TEST(LinearResiduals, VanishOnGeneratedCandidates) {
    Rng rng(14);
    for (int k = 0; k < 20; ++k) {
        auto s = random_graph_point(3, 5, Regime::mixed, 2, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto c = limiting_candidate(pt, rng);
        for (const auto &[key, r] : limiting_linear_residuals(pt, c.G, c.H))
            EXPECT_LE(r, 1e-10) << key;
    }
}

TEST(BetaCertificate, ScalarBranches) {
    EXPECT_TRUE(verify_beta_certificate(scalar(5), scalar(0), scalar_certificate(2)).member());
    EXPECT_TRUE(verify_beta_certificate(scalar(0), scalar(5), scalar_certificate(0)).member());
    EXPECT_TRUE(verify_beta_certificate(scalar(-1), scalar(2), scalar_certificate(1)).member());
    for (int w = 0; w < 3; ++w)
        EXPECT_FALSE(
            verify_beta_certificate(scalar(1), scalar(2), scalar_certificate(w)).member());
}

TEST(BetaCertificate, AcceptsGeneratedCertificates) {
    Rng rng(15);
    for (int k = 0; k < 30; ++k) {
        auto s = random_graph_point(3, 4, Regime::boundary, 3, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto c = limiting_candidate(pt, rng);
        const auto &b = pt.partition().beta;
        Matrix M = pt.svd().to_frame(c.G)(b, b), N = pt.svd().to_frame(c.H)(b, b);
        auto v = verify_beta_certificate(M, N, c.cert);
        EXPECT_TRUE(v.member()) << v.residuals["beta_certificate"];
        ASSERT_TRUE(v.certificate.has_value());
    }
}

TEST(BetaCertificate, MalformedCertificateThrows) {
    auto c = scalar_certificate(0);
    c.Q = 2 * Matrix::Identity(1, 1);
    EXPECT_THROW(verify_beta_certificate(scalar(0), scalar(0), c), std::invalid_argument);
    auto d = scalar_certificate(0);
    d.xi.xi1 = Matrix::Ones(1, 1);
    EXPECT_THROW(verify_beta_certificate(scalar(0), scalar(0), d), std::invalid_argument);
    EXPECT_THROW(verify_beta_certificate(Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                                         scalar_certificate(1)),
                 std::invalid_argument);
}

} // namespace
} // namespace nucnorm
