#include <nucnorm/generators.hpp>
#include <nucnorm/sequence.hpp>

#include <gtest/gtest.h>

namespace nucnorm {
namespace {

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

GraphPoint unit_point() { return GraphPoint::make(scalar(0), scalar(1)); }

LimitingOptions single_thread(std::uint64_t seed = 0) {
    LimitingOptions o;
    o.threads = 1;
    o.seed = seed;
    return o;
}

TEST(LimitingCone, ScalarBranches) {
    auto pt = unit_point();
    struct Case {
        double g, h;
        bool member;
        IndexList plus, zero, minus;
    };
    const Case cases[] = {{5, 0, true, {}, {}, {0}},
                          {0, 5, true, {}, {0}, {}},
                          {-1, 2, true, {}, {0}, {}},
                          {1, 2, false, {}, {}, {}},
                          {1, 1, false, {}, {}, {}}};
    for (const Case &c : cases) {
        auto v = limiting_normal_membership(pt, scalar(c.g), scalar(c.h));
        EXPECT_EQ(v.member(), c.member) << c.g << ", " << c.h;
        if (c.member) {
            ASSERT_TRUE(v.certificate.has_value());
            EXPECT_EQ(v.certificate->sub_partition.plus, c.plus);
            EXPECT_EQ(v.certificate->sub_partition.zero, c.zero);
            EXPECT_EQ(v.certificate->sub_partition.minus, c.minus);
        } else {
            EXPECT_EQ(v.state, VerdictState::non_member);
        }
    }
}

TEST(LimitingCone, ScalarLimitingIsStrictlyLarger) {
    auto pt = unit_point();
    EXPECT_FALSE(regular_normal_membership(pt, scalar(5), scalar(0)).member());
    EXPECT_TRUE(limiting_normal_membership(pt, scalar(5), scalar(0)).member());
}

TEST(LimitingCone, EmptyBetaIsLinear) {
    auto pt = GraphPoint::make(scalar(1), scalar(1));
    EXPECT_TRUE(limiting_normal_membership(pt, scalar(0), scalar(7)).member());
    EXPECT_FALSE(limiting_normal_membership(pt, scalar(1), scalar(0)).member());
}

TEST(LimitingCone, AsymmetricBetaBlockIsRejected) {
    auto pt = GraphPoint::make(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
    Matrix K(2, 2);
    K << 0, 1, -1, 0;
    auto v = limiting_normal_membership(pt, Matrix::Zero(2, 2), K, single_thread());
    EXPECT_EQ(v.state, VerdictState::non_member);
    EXPECT_GT(v.residuals["beta_symmetry"], 0.5);
}

TEST(LimitingCone, ContainsRegularCone) {
    Rng rng(40);
    for (int k = 0; k < 20; ++k) {
        auto s = random_graph_point(3, 4, Regime::mixed, 1 + k % 3, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto [Xs, Ys] = regular_candidate(pt, rng);
        EXPECT_TRUE(limiting_normal_membership(pt, Xs, Ys, single_thread(k)).member());
    }
}

TEST(LimitingCone, SearchFindsGeneratedCandidates) {
    Rng rng(41);
    for (int k = 0; k < 20; ++k) {
        Index nb = 2 + k % 2;
        auto s = random_graph_point(3, 4, Regime::boundary, nb, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto c = limiting_candidate(pt, rng);
        auto v = limiting_normal_membership(pt, c.G, c.H, single_thread(k));
        EXPECT_TRUE(v.member()) << to_string(v.state);
        ASSERT_TRUE(v.certificate.has_value());
        const auto &b = pt.partition().beta;
        Matrix M = pt.svd().to_frame(c.G)(b, b), N = pt.svd().to_frame(c.H)(b, b);
        EXPECT_TRUE(verify_beta_certificate(M, N, *v.certificate).member());
    }
}

TEST(LimitingCone, RandomPairsAreNotMembers) {
    Rng rng(42);
    for (int k = 0; k < 10; ++k) {
        auto s = random_graph_point(2, 3, Regime::boundary, 2, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto [G, H] = random_candidate(2, 3, rng);
        EXPECT_FALSE(limiting_normal_membership(pt, G, H, single_thread()).member());
    }
}

TEST(LimitingCone, DeterministicAcrossThreadCounts) {
    Rng rng(43);
    auto s = random_graph_point(3, 3, Regime::boundary, 3, rng);
    auto pt = GraphPoint::make(s.X, s.Y);
    auto c = limiting_candidate(pt, rng);
    LimitingOptions a = single_thread(5), b = single_thread(5);
    b.threads = 3;
    auto va = limiting_normal_membership(pt, c.G, c.H, a);
    auto vb = limiting_normal_membership(pt, c.G, c.H, b);
    EXPECT_EQ(va.state, vb.state);
    EXPECT_EQ(va.residuals, vb.residuals);
}

TEST(Sequence, UnitCoefficientMinusBranch) {
    auto pt = unit_point();
    auto v = limiting_normal_membership(pt, scalar(1), scalar(0));
    ASSERT_TRUE(v.member());
    for (int k : {2, 10, 100}) {
        auto t = construct_sequence(pt, scalar(1), scalar(0), *v.certificate, k);
        EXPECT_DOUBLE_EQ(t.Xk(0, 0), 0);
        EXPECT_DOUBLE_EQ(t.Yk(0, 0), 1 - 1.0 / k);
        EXPECT_DOUBLE_EQ(t.Gk(0, 0), 1);
        EXPECT_DOUBLE_EQ(t.Hk(0, 0), 0);
    }
}

TEST(Sequence, ScalarMinusBranch) {
    auto pt = unit_point();
    auto v = limiting_normal_membership(pt, scalar(5), scalar(0));
    ASSERT_TRUE(v.member());
    double prev = 1e300;
    for (int k : {10, 100, 1000}) {
        auto t = construct_sequence(pt, scalar(5), scalar(0), *v.certificate, k);
        EXPECT_TRUE(graph_membership(t.Xk, t.Yk).member());
        EXPECT_LT(t.Yk(0, 0), 1);
        auto pk = GraphPoint::make(t.Xk, t.Yk);
        EXPECT_TRUE(regular_normal_membership(pk, t.Gk, t.Hk).member());
        double err = pair_norm(t.Xk - pt.X, t.Yk - pt.Y) +
                     pair_norm(t.Gk - scalar(5), t.Hk - scalar(0));
        EXPECT_LT(err, prev);
        EXPECT_LE(err * k, 10);
        prev = err;
    }
}

TEST(Sequence, StationaryZeroBranch) {
    auto pt = unit_point();
    auto v = limiting_normal_membership(pt, scalar(-1), scalar(2));
    ASSERT_TRUE(v.member());
    auto t = construct_sequence(pt, scalar(-1), scalar(2), *v.certificate, 10);
    EXPECT_LE((t.Xk - pt.X).norm(), 1e-15);
    EXPECT_LE((t.Yk - pt.Y).norm(), 1e-15);
    EXPECT_LE((t.Gk - scalar(-1)).norm(), 1e-15);
    EXPECT_LE((t.Hk - scalar(2)).norm(), 1e-15);
}

TEST(Sequence, TwoDimensionalBetaConverges) {
    Rng rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = random_graph_point(3, 3, Regime::boundary, 2, rng);
        auto pt = GraphPoint::make(s.X, s.Y);
        auto c = limiting_candidate(pt, rng);
        auto v = limiting_normal_membership(pt, c.G, c.H, single_thread(trial));
        ASSERT_TRUE(v.member());
        std::vector<double> err;
        for (int k : {10, 100, 1000}) {
            auto t = construct_sequence(pt, c.G, c.H, *v.certificate, k);
            EXPECT_TRUE(graph_membership(t.Xk, t.Yk).member());
            auto pk = GraphPoint::make(t.Xk, t.Yk);
            EXPECT_TRUE(regular_normal_membership(pk, t.Gk, t.Hk, 1e-7).member());
            err.push_back(pair_norm(t.Xk - pt.X, t.Yk - pt.Y) +
                          pair_norm(t.Gk - c.G, t.Hk - c.H));
        }
        EXPECT_LE(err[2], 0.2 * err[0] + 1e-12);
    }
}

TEST(Sequence, Rejections) {
    auto pt = unit_point();
    auto v = limiting_normal_membership(pt, scalar(5), scalar(0));
    ASSERT_TRUE(v.member());
    EXPECT_THROW(construct_sequence(pt, scalar(5), scalar(0), *v.certificate, 1),
                 std::invalid_argument);
    EXPECT_THROW(construct_sequence(pt, scalar(1), scalar(2), *v.certificate, 10),
                 std::invalid_argument);
    LimitingCertificate bad = *v.certificate;
    bad.Q = Matrix::Identity(2, 2);
    EXPECT_THROW(construct_sequence(pt, scalar(5), scalar(0), bad, 10),
                 std::invalid_argument);
    EXPECT_THROW(construct_sequence(pt, scalar(5), scalar(0), *v.certificate, 100000000),
                 NumericError);
}

} // namespace
} // namespace nucnorm
