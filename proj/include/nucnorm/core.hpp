#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nucnorm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Raised when a factorization or numerical self-check fails.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Absolute-plus-relative threshold: `abs + rel * scale`.
struct Tolerance {
    double abs = 1e-10;
    double rel = 1e-12;

    double at(double scale) const { return abs + rel * scale; }
};

/// Every numerical tolerance the toolkit uses, in one place.
struct Tolerances {
    /// Singular values with |sigma - 1| <= one are treated as exactly one.
    double one = 1e-8;
    Tolerance orth;
    Tolerance recon;
    Tolerance sym;
    /// Fixed-point check Pi_B(X + Y) = Y for graph points, relative to
    /// 1 + ||X + Y||_F.
    double graph = 1e-8;
};

inline void require_finite(const Matrix &A, const char *what) {
    if (!A.allFinite())
        throw std::invalid_argument(std::string(what) +
                                    ": matrix has non-finite entries");
}

inline void require_wide(const Matrix &A, const char *what) {
    if (A.rows() < 1 || A.cols() < 1)
        throw std::invalid_argument(std::string(what) + ": empty matrix");
    if (A.rows() > A.cols())
        throw std::invalid_argument(
            std::string(what) +
            ": expected rows <= cols (transpose the input explicitly)");
}

inline void require_same_shape(const Matrix &A, const Matrix &B,
                               const char *what) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

inline void require_square(const Matrix &A, const char *what) {
    if (A.rows() != A.cols())
        throw std::invalid_argument(std::string(what) +
                                    ": square matrix required");
}

/// Frobenius norm of the pair (A, B).
inline double pair_norm(const Matrix &A, const Matrix &B) {
    return std::sqrt(A.squaredNorm() + B.squaredNorm());
}

enum class VerdictState { member, non_member, search_exhausted };

inline const char *to_string(VerdictState s) {
    switch (s) {
    case VerdictState::member: return "member";
    case VerdictState::non_member: return "non-member";
    case VerdictState::search_exhausted: return "search-exhausted";
    }
    return "unknown";
}

/// Partition (beta_plus, beta_zero, beta_minus) of the positions 0..|beta|-1
/// of the unit-singular-value block.
struct BetaSubPartition {
    IndexList plus;
    IndexList zero;
    IndexList minus;

    Index size() const {
        return static_cast<Index>(plus.size() + zero.size() + minus.size());
    }
};

struct XiPair {
    BetaSubPartition partition;
    Matrix xi1;
    Matrix xi2;
    /// The (beta_plus, beta_minus) block of xi1.
    Matrix free_block;
};

/// Witness for the beta-beta condition of the limiting normal cone.
struct LimitingCertificate {
    BetaSubPartition sub_partition;
    Matrix Q;
    XiPair xi;
    double residual_beta = 0;
};

struct MembershipVerdict {
    VerdictState state = VerdictState::non_member;
    std::map<std::string, double> residuals;
    /// Effective thresholds, keyed like `residuals`.
    std::map<std::string, double> tolerances;
    std::optional<LimitingCertificate> certificate;
    std::vector<std::string> notes;

    bool member() const { return state == VerdictState::member; }
};

/// Sets `state` from the residual/threshold maps: member iff every residual
/// is within its threshold.
inline void settle(MembershipVerdict &v) {
    bool ok = true;
    for (const auto &[key, r] : v.residuals) {
        auto it = v.tolerances.find(key);
        if (it == v.tolerances.end() || !(r <= it->second))
            ok = false;
    }
    v.state = ok ? VerdictState::member : VerdictState::non_member;
}

} // namespace nucnorm
