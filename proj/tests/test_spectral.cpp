#include <nucnorm/generators.hpp>
#include <nucnorm/spectral.hpp>

#include <gtest/gtest.h>

namespace nucnorm {
namespace {

Matrix diag_wide(std::initializer_list<double> d, Index n) {
    Matrix A = Matrix::Zero(static_cast<Index>(d.size()), n);
    Index i = 0;
    for (double x : d) {
        A(i, i) = x;
        ++i;
    }
    return A;
}

TEST(Decompose, DiagonalInput) {
    Matrix Z(2, 2);
    Z << 2, 0, 0, 0.5;
    auto d = decompose(Z);
    EXPECT_DOUBLE_EQ(d.sigma(0), 2);
    EXPECT_DOUBLE_EQ(d.sigma(1), 0.5);
    EXPECT_NEAR((d.U.cwiseAbs() - Matrix::Identity(2, 2)).norm(), 0, 1e-14);
    EXPECT_NEAR((d.V.cwiseAbs() - Matrix::Identity(2, 2)).norm(), 0, 1e-14);
}

TEST(Decompose, WideDiagonal) {
    Matrix Z = diag_wide({3, 1, 0.25}, 5);
    auto d = decompose(Z);
    EXPECT_NEAR((d.sigma - Vector(Eigen::Vector3d(3, 1, 0.25))).norm(), 0, 1e-14);
    EXPECT_EQ(d.V.cols(), 5);
    EXPECT_LE((d.reconstruct() - Z).norm(), 1e-14);
}

TEST(Decompose, ZeroMatrix) {
    auto d = decompose(Matrix::Zero(2, 3));
    EXPECT_EQ(d.sigma, Vector::Zero(2));
}

TEST(Decompose, RandomReconstructionAndOrthogonality) {
    Rng rng(11);
    for (int k = 0; k < 50; ++k) {
        Matrix Z = gaussian_matrix(3, 4, rng);
        auto d = decompose(Z);
        EXPECT_LE((d.reconstruct() - Z).norm(), 1e-10 * (1 + Z.norm()));
        EXPECT_LE((d.U.transpose() * d.U - Matrix::Identity(3, 3)).norm(), 1e-12);
        EXPECT_LE((d.V.transpose() * d.V - Matrix::Identity(4, 4)).norm(), 1e-12);
        for (Index i = 1; i < 3; ++i)
            EXPECT_GE(d.sigma(i - 1), d.sigma(i));
    }
}

TEST(Decompose, CanonicalSignsAndDeterminism) {
    Rng rng(5);
    Matrix Z = gaussian_matrix(3, 5, rng);
    auto a = decompose(Z), b = decompose(Z);
    EXPECT_EQ(a.U, b.U);
    EXPECT_EQ(a.V, b.V);
    EXPECT_EQ(a.sigma, b.sigma);
    for (Index j = 0; j < 3; ++j) {
        Index i = 0;
        while (std::abs(a.U(i, j)) <= 1e-12)
            ++i;
        EXPECT_GT(a.U(i, j), 0);
    }
}

TEST(Decompose, Rejections) {
    EXPECT_THROW(decompose(Matrix::Zero(3, 2)), std::invalid_argument);
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(decompose(bad), std::invalid_argument);
}

TEST(SymSkew, Examples) {
    Matrix Z(2, 2);
    Z << 0, 1, 0, 0;
    Matrix S(2, 2), K(2, 2);
    S << 0, .5, .5, 0;
    K << 0, .5, -.5, 0;
    EXPECT_EQ(sym_part(Z), S);
    EXPECT_EQ(skew_part(Z), K);
    EXPECT_EQ(skew_part(S), Matrix::Zero(2, 2));
    EXPECT_THROW(sym_part(Matrix::Zero(2, 3)), std::invalid_argument);
}

TEST(SymSkew, DecompositionAndOrthogonality) {
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        Matrix Z = gaussian_matrix(3, 3, rng), W = gaussian_matrix(3, 3, rng);
        EXPECT_LE((sym_part(Z) + skew_part(Z) - Z).norm(), 1e-15);
        EXPECT_NEAR(sym_part(Z).cwiseProduct(skew_part(W)).sum(), 0, 1e-14);
    }
}

TEST(PsdProject, Examples) {
    Matrix S = Vector(Eigen::Vector2d(1, -2)).asDiagonal();
    Matrix expect = Vector(Eigen::Vector2d(1, 0)).asDiagonal();
    EXPECT_LE((psd_project(S) - expect).norm(), 1e-15);
    Matrix P(2, 2);
    P << 2, 1, 1, 2;
    EXPECT_LE((psd_project(P) - P).norm(), 1e-14);
    Matrix A(2, 2);
    A << 0, 1, 0, 0;
    EXPECT_THROW(psd_project(A), std::invalid_argument);
}

TEST(PsdProject, MoreauConditions) {
    Rng rng(17);
    for (int k = 0; k < 50; ++k) {
        Matrix S = sym_part(gaussian_matrix(4, 4, rng));
        Matrix P = psd_project(S);
        Matrix R = S - P;
        EXPECT_GE(sym_lambda_min(P), -1e-12);
        EXPECT_LE(sym_lambda_max(R), 1e-12);
        EXPECT_NEAR(P.cwiseProduct(R).sum(), 0, 1e-12);
    }
}

TEST(MidClip, Examples) {
    EXPECT_EQ(mid_clip(Eigen::Vector3d(1, 0.5, -2)), Vector(Eigen::Vector3d(1, 0.5, -1)));
    EXPECT_EQ(mid_clip_dir(Eigen::Vector3d(1, 0.5, -2), Eigen::Vector3d(1, 1, 1)),
              Vector(Eigen::Vector3d(0, 1, 0)));
    Vector x(1), h(1);
    x << -1;
    h << -3;
    EXPECT_EQ(mid_clip_dir(x, h)(0), 0);
    h << 3;
    EXPECT_EQ(mid_clip_dir(x, h)(0), 3);
    EXPECT_THROW(mid_clip_dir(Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
}

TEST(MidClip, InteriorIsIdentity) {
    Rng rng(2);
    for (int k = 0; k < 20; ++k) {
        Vector x(4);
        for (Index i = 0; i < 4; ++i)
            x(i) = uniform(rng, -0.99, 0.99);
        Vector h = gaussian_matrix(4, 1, rng);
        EXPECT_EQ(mid_clip_dir(x, h), h);
    }
}

TEST(MidClip, ExactOnClampBoundary) {
    Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        Vector x(2), h(2);
        x << 1, -1;
        h << uniform(rng, -1.9, 1.9), uniform(rng, -1.9, 1.9);
        EXPECT_LE((mid_clip(x + h) - mid_clip(x) - mid_clip_dir(x, h)).norm(), 1e-15);
    }
}

TEST(ClassifyIndices, Examples) {
    auto p = classify_indices(Eigen::Vector3d(2, 1, 0.5), 4, 1e-8);
    EXPECT_EQ(p.alpha, IndexList{0});
    EXPECT_EQ(p.beta, IndexList{1});
    EXPECT_EQ(p.gamma, IndexList{2});
    EXPECT_EQ(p.c(), IndexList{3});

    auto q = classify_indices(Eigen::Vector2d(0.3, 0.1), 2, 1e-8);
    EXPECT_TRUE(q.alpha.empty());
    EXPECT_TRUE(q.beta.empty());
    EXPECT_EQ(q.gamma, (IndexList{0, 1}));

    auto r = classify_indices(Eigen::Vector2d(1 + 1e-9, 1 - 1e-9), 2, 1e-8);
    EXPECT_EQ(r.beta, (IndexList{0, 1}));

    EXPECT_THROW(classify_indices(Eigen::Vector2d(0.1, 0.3), 2, 1e-8),
                 std::invalid_argument);
}

TEST(OmegaMatrices, Examples) {
    auto o = omega_matrices(Eigen::Vector2d(2, 0.5), 2);
    EXPECT_DOUBLE_EQ(o.omega1(0, 1), 1.0 / 3);
    EXPECT_DOUBLE_EQ(o.omega2(0, 1), 0.6);
    EXPECT_DOUBLE_EQ(o.omega2(0, 0), 0.5);

    auto e = omega_matrices(Eigen::Vector2d(1, 1), 2);
    EXPECT_EQ(e.omega1(0, 1), 0);

    auto z = omega_matrices(Eigen::Vector2d(2, 0), 3);
    EXPECT_DOUBLE_EQ(z.omega3(0, 0), 0.5);
    EXPECT_EQ(z.omega3(1, 0), 0);
}

TEST(OmegaMatrices, RangeAndSymmetry) {
    Rng rng(4);
    for (int k = 0; k < 30; ++k) {
        SpectrumShape s{uniform_index(rng, 0, 2), uniform_index(rng, 0, 2),
                        uniform_index(rng, 0, 2), k % 2 == 0};
        if (s.alpha + s.beta + s.gamma == 0)
            continue;
        Vector sig = random_spectrum(s, rng);
        auto o = omega_matrices(sig, sig.size() + 2);
        for (const Matrix *M : {&o.omega1, &o.omega2, &o.omega3}) {
            EXPECT_GE(M->minCoeff(), 0);
            EXPECT_LE(M->maxCoeff(), 1);
        }
        EXPECT_EQ(o.omega1, o.omega1.transpose());
        EXPECT_EQ(o.omega2, o.omega2.transpose());
    }
}

TEST(ThetaSigma, ThreeBlockExample) {
    Vector sig = Eigen::Vector3d(2, 1, 0.5);
    auto p = classify_indices(sig, 4, 1e-8);
    auto x = auxiliary_matrices(sig, p);
    EXPECT_DOUBLE_EQ(x.theta1(0, 2), 1.0 / 3);
    EXPECT_EQ(x.theta1(1, 2), 1);
    EXPECT_EQ(x.theta1(1, 1), 0);
    EXPECT_EQ(x.sigma1(1, 1), 0);
    Matrix E = Matrix::Ones(3, 3);
    // Sigma2 = E - Sigma1 on blocks touching alpha, zero elsewhere.
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) {
            bool touches_alpha = i == 0 || j == 0;
            EXPECT_DOUBLE_EQ(x.sigma2(i, j), touches_alpha ? E(i, j) - x.sigma1(i, j) : 0);
        }
}

TEST(ThetaSigma, EmptyBetaAndEmptyAlpha) {
    Vector sig = Eigen::Vector3d(2.5, 1.5, 0.3);
    auto p = classify_indices(sig, 3, 1e-8);
    auto x = auxiliary_matrices(sig, p);
    for (Index i : p.alpha)
        for (Index j : p.gamma) {
            EXPECT_DOUBLE_EQ(x.theta1(i, j) + x.theta2(i, j), 1);
            EXPECT_DOUBLE_EQ(x.sigma1(i, j) + x.sigma2(i, j), 1);
        }

    Vector in = Eigen::Vector3d(1, 0.7, 0.2);
    auto q = classify_indices(in, 3, 1e-8);
    auto y = auxiliary_matrices(in, q);
    EXPECT_EQ(y.theta2, Matrix::Zero(3, 3));
    EXPECT_EQ(y.sigma2, Matrix::Zero(3, 3));
}

TEST(ThetaSigma, SigmaSumIsOnesOffBetaBeta) {
    Vector sig(5);
    sig << 2, 1.5, 1, 1, 0.4;
    auto p = classify_indices(sig, 6, 1e-8);
    auto x = auxiliary_matrices(sig, p);
    Matrix sum = x.sigma1 + x.sigma2;
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 5; ++j) {
            bool bb = sig(i) == 1 && sig(j) == 1;
            EXPECT_DOUBLE_EQ(sum(i, j), bb ? 0 : 1);
        }
}

TEST(DividedDifference, Examples) {
    Matrix D = divided_difference(Eigen::Vector3d(1.5, 1.0, 0.5));
    EXPECT_EQ(D(0, 1), 0);
    EXPECT_DOUBLE_EQ(D(0, 2), 0.5);
    EXPECT_EQ(D(1, 2), 1);
    EXPECT_EQ(D(0, 0), 0);
    EXPECT_EQ(D(1, 1), 0);
    EXPECT_EQ(D(2, 2), 1);
    EXPECT_EQ(divided_difference(Eigen::Vector2d(2, 2)), Matrix::Zero(2, 2));
    EXPECT_EQ(divided_difference(Eigen::Vector2d(0.5, 0.5)), Matrix::Ones(2, 2));
    EXPECT_THROW(divided_difference(Eigen::Vector2d(1, 0)), std::invalid_argument);
}

TEST(DividedDifference, LimitHasXiStructure) {
    // z^k -> e with sign pattern (+, +, 0, -, -) and paired decay rates.
    const double t = 0.3;
    for (int k : {100, 10000, 1000000}) {
        double u = 1.0 / k;
        Vector z(5);
        z << 1 + u, 1 + 2 * u, 1, 1 - t / (1 - t) * u, 1 - 2 * t / (1 - t) * u;
        Matrix D = divided_difference(z);
        EXPECT_GE(D.minCoeff(), 0);
        EXPECT_LE(D.maxCoeff(), 1);
        // (beta+, beta+), (beta+, beta0) -> 0
        EXPECT_EQ(D.block(0, 0, 2, 3).maxCoeff(), 0);
        // (beta0, beta-), (beta-, beta-) -> 1
        EXPECT_EQ(D.block(2, 3, 1, 2).minCoeff(), 1);
        EXPECT_EQ(D.block(3, 3, 2, 2).minCoeff(), 1);
        // (beta+_i, beta-_i) = d / (u + d) = t for matched rates
        EXPECT_NEAR(D(0, 3), t, 1e-15 * k);
        EXPECT_NEAR(D(1, 4), t, 1e-15 * k);
    }
}

TEST(XiPair, Examples) {
    BetaSubPartition zero{{}, {0, 1}, {}};
    auto a = xi_pair(zero, Matrix(0, 0));
    EXPECT_EQ(a.xi1, Matrix::Zero(2, 2));
    EXPECT_EQ(a.xi2, Matrix::Zero(2, 2));

    BetaSubPartition minus{{}, {}, {0, 1}};
    auto b = xi_pair(minus, Matrix(0, 2));
    EXPECT_EQ(b.xi1, Matrix::Ones(2, 2));
    EXPECT_EQ(b.xi2, Matrix::Zero(2, 2));

    BetaSubPartition pm{{0}, {}, {1}};
    auto c = xi_pair(pm, Matrix::Constant(1, 1, 0.25));
    Matrix x1(2, 2), x2(2, 2);
    x1 << 0, 0.25, 0.25, 1;
    x2 << 1, 0.75, 0.75, 0;
    EXPECT_EQ(c.xi1, x1);
    EXPECT_EQ(c.xi2, x2);

    EXPECT_THROW(xi_pair(pm, Matrix::Constant(1, 1, 1.5)), std::invalid_argument);
    EXPECT_THROW(xi_pair(pm, Matrix::Zero(2, 1)), std::invalid_argument);
    EXPECT_THROW(xi_pair(BetaSubPartition{{0}, {0}, {}}, Matrix(1, 0)),
                 std::invalid_argument);
}

TEST(XiPair, RangeAndSymmetry) {
    Rng rng(9);
    BetaSubPartition p{{0, 3}, {1}, {2, 4}};
    Matrix T(2, 2);
    for (Index i = 0; i < 4; ++i)
        T(i / 2, i % 2) = uniform(rng, 0, 1);
    auto x = xi_pair(p, T);
    EXPECT_EQ(x.xi1, x.xi1.transpose());
    EXPECT_EQ(x.xi2, x.xi2.transpose());
    for (const Matrix *M : {&x.xi1, &x.xi2}) {
        EXPECT_GE(M->minCoeff(), 0);
        EXPECT_LE(M->maxCoeff(), 1);
    }
}

} // namespace
} // namespace nucnorm
