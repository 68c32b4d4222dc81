#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "fdcvt/functionals.hpp"
#include "fdcvt/linalg.hpp"

namespace fdcvt {

/// Even moments M4, M6, M8 of the standardized symmetric error law
/// (M2 = 1 implied) and the cumulant combinations derived from them.
/// All three cumulants vanish for Gaussian errors.
struct ErrorMomentProfile {
    double M4 = 3, M6 = 15, M8 = 105;
    double nu4 = 0, nu6 = 0, nu8 = 0;
    std::string name = "gaussian";

    bool is_gaussian_like() const { return nu4 == 0.0 && nu6 == 0.0 && nu8 == 0.0; }
};

/// Validate the moment inequalities of a unit-variance symmetric law and
/// derive nu4 = M4 - 3, nu6 = M6 - 15 M4 + 30,
/// nu8 = M8 - 28 M6 - 35 M4² + 420 M4 - 630.
inline ErrorMomentProfile cumulants_from_moments(double m4, double m6, double m8,
                                                 std::string name = "custom") {
    if (!(m4 >= 1.0))
        throw InvalidMomentSequence("moment inequality violated: M4 >= 1 (Jensen on M2 = 1)");
    if (!(m8 >= m4 * m4))
        throw InvalidMomentSequence("moment inequality violated: M8 >= M4^2");
    if (!(m6 * m6 >= m4 * m4 * m4))
        throw InvalidMomentSequence("moment inequality violated: M6^2 >= M4^3 (Lyapunov)");
    ErrorMomentProfile p;
    p.M4 = m4;
    p.M6 = m6;
    p.M8 = m8;
    p.nu4 = m4 - 3.0;
    p.nu6 = m6 - 15.0 * m4 + 30.0;
    p.nu8 = m8 - 28.0 * m6 - 35.0 * m4 * m4 + 420.0 * m4 - 630.0;
    p.name = std::move(name);
    return p;
}

inline ErrorMomentProfile gaussian_profile() {
    return cumulants_from_moments(3.0, 15.0, 105.0, "gaussian");
}

inline ErrorMomentProfile two_point_profile() {
    return cumulants_from_moments(1.0, 1.0, 1.0, "two_point");
}

/// Asymptotic mean a and variance b of the statistic under the null,
/// with the 2x2 matrix Theta (variances/covariance of the two base
/// statistics T1, T2) and the delta-method gradient Delta.
struct NullMoments {
    double a = 0, b = 0;
    double ET1 = 0, ET2 = 0;
    Eigen::Matrix2d theta = Eigen::Matrix2d::Zero();
    Eigen::Vector2d delta = Eigen::Vector2d::Zero();
};

/// First-order variance of the ratio x/y - 1 at (ET1, ET2) with
/// covariance matrix theta: grad = (1/ET2, -ET1/ET2²).
inline double delta_method_variance(double et1, double et2, const Eigen::Matrix2d& theta) {
    if (et2 == 0.0) throw ZeroDenominator("delta_method_variance: ET2 is zero");
    Eigen::Vector2d grad(1.0 / et2, -et1 / (et2 * et2));
    return grad.dot(theta * grad);
}

/// Null moments from the projection functionals and the error profile.
///
///   E T1 = 3 t1 + nu4 q2
///   E T2 = ((n-p)² + 2(n-p) + nu4 t1) / n
///   Theta11 = 72 d2 + 24 q2 + nu4 (96 m1 + 72 q3 + 36 d2sq)
///             + nu4² (18 q4 + 16 m4) + nu6 (12 m2 + 16 m3) + nu8 m5
///   Theta22 = (8 (n-p)³ + 4 nu4 (n-p)² t1) / n²
///   Theta12 = ((n-p)/n) (24 t1 + 16 nu4 c1 + 12 nu4 c2 + 2 nu6 c3)
///   a = E T1 / E T2 - 1,  b = Delta' Theta Delta.
inline NullMoments null_moments(const ProjectionSummary& s, const ErrorMomentProfile& prof,
                                Index n, Index p) {
    if (n != s.n || p != s.p)
        throw DimensionMismatch("null_moments: summary computed for different (n, p)");
    const double np = static_cast<double>(n - p);
    const double nn = static_cast<double>(n);
    const double nu4 = prof.nu4, nu6 = prof.nu6, nu8 = prof.nu8;

    NullMoments m;
    m.ET1 = 3.0 * s.t1 + nu4 * s.q2;
    const double denom = np * np + 2.0 * np + nu4 * s.t1;
    m.ET2 = denom / nn;
    m.a = nn * m.ET1 / denom - 1.0;

    m.theta(0, 0) = 72.0 * s.d2 + 24.0 * s.q2 +
                    nu4 * (96.0 * s.m1 + 72.0 * s.q3 + 36.0 * s.d2sq) +
                    nu4 * nu4 * (18.0 * s.q4 + 16.0 * s.m4) +
                    nu6 * (12.0 * s.m2 + 16.0 * s.m3) + nu8 * s.m5;
    m.theta(1, 1) = (8.0 * np * np * np + 4.0 * nu4 * np * np * s.t1) / (nn * nn);
    m.theta(0, 1) = m.theta(1, 0) =
        (np / nn) * (24.0 * s.t1 + 16.0 * nu4 * s.c1 + 12.0 * nu4 * s.c2 + 2.0 * nu6 * s.c3);

    m.delta(0) = nn / denom;
    m.delta(1) = -nn * nn * m.ET1 / (denom * denom);
    m.b = m.delta.dot(m.theta * m.delta);
    if (!(m.b > 0.0))
        throw NonPositiveVariance("null variance b = " + std::to_string(m.b) +
                                  " is not positive; design too degenerate for the "
                                  "normal approximation");
    return m;
}

/// Moments of T1, T2 for a general variance profile (A = P diag(sigma)).
/// Var T2 and Cov keep only the leading term; the dropped remainder is O(1)
/// against leading orders O(n) — use them for power prediction, not for
/// p-values.
struct GeneralMoments {
    double ET1 = 0, ET2 = 0;
    double VarT1 = 0;
    double VarT2_leading = 0;
    double Cov_leading = 0;
    double predicted_mean_T = 0;
};

inline GeneralMoments general_moments(const GeneralSummary& s, const ErrorMomentProfile& prof,
                                      Index n) {
    if (n != s.n) throw DimensionMismatch("general_moments: summary computed for different n");
    const double nn = static_cast<double>(n);
    const double nu4 = prof.nu4, nu6 = prof.nu6, nu8 = prof.nu8;

    GeneralMoments g;
    g.ET1 = 3.0 * s.tBB + nu4 * s.sA4;
    g.ET2 = (s.trB * s.trB + 2.0 * s.trB2 + nu4 * s.tAA) / nn;
    g.VarT1 = 72.0 * s.gd2 + 24.0 * s.gq2 +
              nu4 * (96.0 * s.gm1 + 36.0 * s.gd2sq + 72.0 * s.gq3) +
              nu4 * nu4 * (16.0 * s.gm4 + 18.0 * s.gq4) +
              nu6 * (16.0 * s.gm3 + 12.0 * s.gm2) + nu8 * s.gm5;
    g.VarT2_leading = (8.0 * s.vt2_1 + 4.0 * nu4 * s.vt2_2) / (nn * nn);
    g.Cov_leading = (s.trB / nn) * (24.0 * s.cov_bb + 16.0 * nu4 * s.cov_ba3 +
                                    12.0 * nu4 * s.cov_dba + 2.0 * nu6 * s.cov_da4);
    if (!(g.ET2 > 0.0)) throw ZeroDenominator("general_moments: E T2 must be positive");
    g.predicted_mean_T = g.ET1 / g.ET2 - 1.0;
    if (g.VarT1 < 0.0)
        throw NonPositiveVariance("general_moments: Var T1 came out negative");
    return g;
}

} // namespace fdcvt
