#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "fdcvt/linalg.hpp"

namespace fdcvt {

/// Relative singular-value cutoff certifying numerical full column rank.
inline constexpr double kRankTolerance = 1e-10;

namespace design_detail {

/// Identify the columns involved in a rank deficiency: the pivot columns
/// beyond the numerical rank, plus the earlier columns each of them is
/// (numerically) a combination of.
inline std::vector<int> dependency_columns(const Matrix& x) {
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    const Matrix r = qr.matrixR().topRows(std::min(x.rows(), x.cols()));
    double rmax = 0.0;
    for (Index k = 0; k < x.cols(); ++k) rmax = std::max(rmax, std::abs(r(k, k)));
    Index rank = 0;
    while (rank < x.cols() && std::abs(r(rank, rank)) > kRankTolerance * rmax) ++rank;

    std::vector<int> cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Index j = rank; j < x.cols(); ++j) {
        cols.push_back(static_cast<int>(perm(j)));
        if (rank > 0) {
            const Vector coef = r.topLeftCorner(rank, rank)
                                    .triangularView<Eigen::Upper>()
                                    .solve(r.block(0, j, rank, 1));
            const double cmax = coef.cwiseAbs().maxCoeff();
            for (Index i = 0; i < rank; ++i)
                if (std::abs(coef(i)) > 1e-6 * cmax) cols.push_back(static_cast<int>(perm(i)));
        }
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
}

[[noreturn]] inline void throw_rank_deficient(const Matrix& x) {
    std::vector<int> cols = dependency_columns(x);
    std::ostringstream msg;
    msg << "design matrix is rank deficient; involved columns:";
    for (int c : cols) msg << ' ' << c;
    throw RankDeficient(msg.str(), std::move(cols));
}

} // namespace design_detail

/// Fixed n x p design, n > p >= 1, certified to have full column rank.
/// Certification is a two-tier check: the R diagonal of the Householder QR
/// (kept for later fitting) with a wide margin, escalating to exact singular
/// values when the margin is not met.
class DesignMatrix {
public:
    explicit DesignMatrix(Matrix entries) : x_(std::move(entries)), qr_(1, 1) {
        if (x_.cols() < 1)
            throw DimensionMismatch("design needs at least one column");
        if (x_.rows() <= x_.cols())
            throw DimensionMismatch("design needs n > p (got n=" + std::to_string(x_.rows()) +
                                    ", p=" + std::to_string(x_.cols()) + ")");
        if (!x_.allFinite())
            throw DimensionMismatch("design entries must be finite");
        qr_.compute(x_);
        double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
        for (Index k = 0; k < p(); ++k) {
            const double v = std::abs(qr_.matrixQR()(k, k));
            rmin = std::min(rmin, v);
            rmax = std::max(rmax, v);
        }
        if (rmax == 0.0) design_detail::throw_rank_deficient(x_);
        if (rmin < 1e-8 * rmax) {
            // Borderline: decide on true singular values.
            Eigen::JacobiSVD<Matrix> svd(x_);
            const auto& sv = svd.singularValues();
            if (sv(p() - 1) < kRankTolerance * sv(0)) design_detail::throw_rank_deficient(x_);
        }
    }

    Index n() const { return x_.rows(); }
    Index p() const { return x_.cols(); }
    const Matrix& entries() const { return x_; }
    const Eigen::HouseholderQR<Matrix>& qr() const { return qr_; }

    /// Orthonormal basis of the column space (thin Q), n x p.
    Matrix orthonormal_basis() const {
        return qr_.householderQ() * Matrix::Identity(n(), p());
    }

private:
    Matrix x_;
    Eigen::HouseholderQR<Matrix> qr_;
};

struct OlsFit {
    Vector beta;
    Vector residuals;
};

/// Least-squares fit through the stored Householder factorization (never
/// through the normal equations).
inline OlsFit ols_fit(const DesignMatrix& design, const Vector& y) {
    if (y.size() != design.n())
        throw DimensionMismatch("ols_fit: y has length " + std::to_string(y.size()) +
                                ", expected " + std::to_string(design.n()));
    OlsFit fit;
    fit.beta = design.qr().solve(y);
    fit.residuals = y - design.entries() * fit.beta;
    return fit;
}

/// Residual-maker matrix P = I - Q Q', symmetric and idempotent with
/// trace n - p. Entries are exact to rounding; symmetry holds by
/// construction (built from the lower triangle of a rank update).
class ProjectionMatrix {
public:
    ProjectionMatrix(Matrix p_full, Index p_cols) : p_(std::move(p_full)), pcols_(p_cols) {
        const Index n = p_.rows();
        if (p_.cols() != n) throw DimensionMismatch("projection matrix must be square");
        const double tr = p_.trace();
        if (std::abs(tr - static_cast<double>(n - pcols_)) > 1e-8)
            throw DimensionMismatch("projection trace deviates from n - p");
        for (Index i = 0; i < n; ++i) {
            const double d = p_(i, i);
            if (d < -1e-12 || d > 1.0 + 1e-12)
                throw DimensionMismatch("projection diagonal outside [0,1]");
        }
    }

    Index n() const { return p_.rows(); }
    Index p() const { return pcols_; }
    const Matrix& matrix() const { return p_; }

private:
    Matrix p_;
    Index pcols_;
};

inline ProjectionMatrix projection_matrix(const DesignMatrix& design) {
    const Index n = design.n();
    const Matrix q = design.orthonormal_basis();
    Matrix p = Matrix::Identity(n, n);
    p.selfadjointView<Eigen::Lower>().rankUpdate(q, -1.0);
    p.triangularView<Eigen::StrictlyUpper>() = p.transpose();
    return ProjectionMatrix(std::move(p), design.p());
}

} // namespace fdcvt
