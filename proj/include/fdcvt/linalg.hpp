#pragma once

#include <Eigen/Dense>

#include "fdcvt/errors.hpp"

namespace fdcvt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Entrywise k-th power M ∘ M ∘ ... ∘ M (k factors), k >= 1.
inline Matrix hadamard_power(const Matrix& m, int k) {
    if (k < 1) throw DimensionMismatch("hadamard_power: k must be >= 1");
    Matrix out = m;
    for (int i = 1; i < k; ++i) out = out.cwiseProduct(m);
    return out;
}

inline double relative_gap(double x, double y) {
    const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
    return std::abs(x - y) / scale;
}

} // namespace fdcvt
