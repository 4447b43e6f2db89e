#pragma once

#include "core.hpp"

#include <Eigen/QR>

#include <cstdint>
#include <random>

namespace nucnorm {

using Rng = std::mt19937_64;

inline Matrix gaussian_matrix(Index rows, Index cols, Rng &rng) {
    std::normal_distribution<double> g;
    Matrix A(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            A(i, j) = g(rng);
    return A;
}

/// Orthogonal matrix drawn from the Haar measure (QR of a Gaussian matrix
/// with the sign of R's diagonal fixed).
inline Matrix haar_orthogonal(Index n, Rng &rng) {
    if (n == 0)
        return Matrix(0, 0);
    Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, n, rng));
    Matrix Q = qr.householderQ();
    Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j)
        if (R(j, j) < 0)
            Q.col(j) *= -1;
    return Q;
}

/// Seed for the k-th independent stream derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Index uniform_index(Rng &rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

} // namespace nucnorm
