#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fdcvt/linalg.hpp"
#include "fdcvt/parallel.hpp"
#include "fdcvt/rng.hpp"

namespace fdcvt {

/// Exact (two-point enumeration) or estimated moments of the base
/// statistics T1 = Σ e_i⁴ and T2 = n⁻¹ (Σ e_i²)².
struct ExactMoments {
    double ET1 = 0, ET2 = 0;
    double VarT1 = 0, VarT2 = 0;
    double Cov = 0;
};

/// Average T1, T2 and their second moments over all 2^n sign vectors
/// xi in {-1,+1}^n with e = A xi. A global sign flip leaves both statistics
/// unchanged, so by default only half the cube is walked (each vector
/// standing for its mirror image); use_sign_symmetry=false walks all of it.
/// The walk is Gray-coded with periodic recomputation of e to stop rounding
/// drift.
inline ExactMoments enumerate_two_point(const Matrix& a, bool use_sign_symmetry = true) {
    const Index n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("enumerate_two_point: A must be square");
    if (n < 1) throw DimensionMismatch("enumerate_two_point: empty matrix");
    if (n > 22)
        throw TooLarge("enumerate_two_point: n = " + std::to_string(n) +
                       " exceeds the 2^22 enumeration budget");

    const int free_bits = use_sign_symmetry ? static_cast<int>(n) - 1 : static_cast<int>(n);
    const std::uint64_t total = std::uint64_t{1} << free_bits;

    Vector xi = Vector::Ones(n);
    Vector e = a.rowwise().sum();
    long double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;

    for (std::uint64_t i = 0;; ++i) {
        long double t1 = 0, t2 = 0;
        for (Index k = 0; k < n; ++k) {
            const long double sq = static_cast<long double>(e(k)) * e(k);
            t2 += sq;
            t1 += sq * sq;
        }
        t2 = t2 * t2 / n;
        s1 += t1;
        s2 += t2;
        s11 += t1 * t1;
        s22 += t2 * t2;
        s12 += t1 * t2;

        if (i + 1 == total) break;
        const int b = std::countr_zero(i + 1);  // Gray-code flip position
        xi(b) = -xi(b);
        if (((i + 1) & 0xFFF) == 0)
            e.noalias() = a * xi;
        else
            e += (2.0 * xi(b)) * a.col(b);
    }

    const long double cnt = static_cast<long double>(total);
    ExactMoments m;
    m.ET1 = static_cast<double>(s1 / cnt);
    m.ET2 = static_cast<double>(s2 / cnt);
    m.VarT1 = static_cast<double>(s11 / cnt - (s1 / cnt) * (s1 / cnt));
    m.VarT2 = static_cast<double>(s22 / cnt - (s2 / cnt) * (s2 / cnt));
    m.Cov = static_cast<double>(s12 / cnt - (s1 / cnt) * (s2 / cnt));
    return m;
}

/// Exponent pattern of an Omega multi-index sum: phi(tau, rho) is the
/// multiplicity of the factor a(i_tau, j_rho); restricted means the j
/// indices are pairwise distinct (the subscript-0 form).
struct OmegaPattern {
    Eigen::MatrixXi phi;
    bool restricted = false;

    Index t() const { return phi.rows(); }
    Index s() const { return phi.cols(); }
    /// Multiplicities of the i indices (row sums).
    std::vector<int> gamma() const {
        std::vector<int> g(static_cast<std::size_t>(phi.rows()));
        for (Index r = 0; r < phi.rows(); ++r) g[static_cast<std::size_t>(r)] = phi.row(r).sum();
        return g;
    }
    /// Multiplicities of the j indices (column sums).
    std::vector<int> omega() const {
        std::vector<int> o(static_cast<std::size_t>(phi.cols()));
        for (Index c = 0; c < phi.cols(); ++c) o[static_cast<std::size_t>(c)] = phi.col(c).sum();
        return o;
    }
};

inline OmegaPattern make_pattern(std::initializer_list<std::initializer_list<int>> rows,
                                 bool restricted = false) {
    OmegaPattern p;
    const Index t = static_cast<Index>(rows.size());
    const Index s = t > 0 ? static_cast<Index>(rows.begin()->size()) : 0;
    p.phi.resize(t, s);
    Index r = 0;
    for (const auto& row : rows) {
        if (static_cast<Index>(row.size()) != s)
            throw PatternInvalid("make_pattern: ragged exponent rows");
        Index c = 0;
        for (int v : row) p.phi(r, c++) = v;
        ++r;
    }
    p.restricted = restricted;
    return p;
}

namespace oracle_detail {

inline double ipow(double x, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= x;
    return r;
}

} // namespace oracle_detail

/// Literal evaluation of the Omega sum: loops over i_1..i_t and j_1..j_s,
/// multiplying a(i_tau, j_rho)^phi(tau, rho). Budget: t <= 2, s <= 4,
/// n <= 12.
inline double naive_omega_sum(const Matrix& a, const OmegaPattern& pat) {
    const Index n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("naive_omega_sum: A must be square");
    const Index t = pat.t(), s = pat.s();
    if (t < 1 || s < 1) throw PatternInvalid("naive_omega_sum: empty pattern");
    if (t > 2 || s > 4)
        throw PatternInvalid("naive_omega_sum: pattern exceeds t <= 2, s <= 4");
    if (pat.phi.minCoeff() < 0) throw PatternInvalid("naive_omega_sum: negative exponent");
    if (n > 12)
        throw TooLarge("naive_omega_sum: n = " + std::to_string(n) + " exceeds 12");

    std::array<Index, 2> iv{};
    std::array<Index, 4> jv{};
    long double total = 0;

    auto loop_j = [&](auto&& self, Index depth) -> void {
        if (depth == s) {
            double prod = 1.0;
            for (Index tau = 0; tau < t; ++tau)
                for (Index rho = 0; rho < s; ++rho)
                    prod *= oracle_detail::ipow(a(iv[static_cast<std::size_t>(tau)],
                                                  jv[static_cast<std::size_t>(rho)]),
                                                pat.phi(tau, rho));
            total += prod;
            return;
        }
        for (Index j = 0; j < n; ++j) {
            if (pat.restricted) {
                bool dup = false;
                for (Index k = 0; k < depth; ++k)
                    if (jv[static_cast<std::size_t>(k)] == j) dup = true;
                if (dup) continue;
            }
            jv[static_cast<std::size_t>(depth)] = j;
            self(self, depth + 1);
        }
    };
    auto loop_i = [&](auto&& self, Index depth) -> void {
        if (depth == t) {
            loop_j(loop_j, 0);
            return;
        }
        for (Index i = 0; i < n; ++i) {
            iv[static_cast<std::size_t>(depth)] = i;
            self(self, depth + 1);
        }
    };
    loop_i(loop_i, 0);
    return static_cast<double>(total);
}

/// The ten Var T1 Omega patterns, in the order their coefficients appear in
/// the variance expansion (72, 24, 96nu4, 36nu4, 72nu4, 16nu4^2, 18nu4^2,
/// 16nu6, 12nu6, nu8). Each is named by the matrix expression it equals.
struct NamedOmegaPattern {
    const char* name;
    OmegaPattern pattern;
};

inline std::vector<NamedOmegaPattern> var_t1_patterns() {
    return {
        {"Diag'(B)(B∘B)Diag(B)", make_pattern({{2, 1, 1, 0}, {0, 1, 1, 2}})},
        {"tr((B∘B)²)", make_pattern({{1, 1, 1, 1}, {1, 1, 1, 1}})},
        {"tr(B D_B A A'^∘3)", make_pattern({{2, 1, 1}, {0, 1, 3}})},
        {"Diag'(B)(A∘A)(A∘A)'Diag(B)", make_pattern({{2, 0, 2}, {0, 2, 2}})},
        {"tr((B∘B)(A∘A)(A∘A)')", make_pattern({{1, 1, 2}, {1, 1, 2}})},
        {"tr((A^∘3 A')²)", make_pattern({{3, 1}, {1, 3}})},
        {"tr(((A∘A)(A∘A)')²)", make_pattern({{2, 2}, {2, 2}})},
        {"tr(B A^∘3 A'^∘3)", make_pattern({{1, 3}, {1, 3}})},
        {"tr((A' D_B A)∘(A'^∘2 A^∘2))", make_pattern({{2, 2}, {0, 4}})},
        {"1' A^∘4 A'^∘4 1", make_pattern({{4}, {4}})},
    };
}

/// Monte Carlo estimates of the T1/T2 moments with standard errors.
struct MonteCarloMoments {
    ExactMoments estimates;
    ExactMoments standard_errors;
};

/// Seeded Monte Carlo over e = A xi with xi i.i.d. from the given law.
/// One substream per replication index, so the result does not depend on
/// the execution order or the worker count; identical inputs give
/// bit-identical output.
inline MonteCarloMoments monte_carlo_moments(const Matrix& a, ErrorLaw law, int reps,
                                             std::uint64_t seed) {
    const Index n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("monte_carlo_moments: A must be square");
    if (reps < 1000) throw DimensionMismatch("monte_carlo_moments: reps must be >= 1000");

    constexpr std::uint64_t kMcPurpose = 0x6D63; // "mc"
    std::vector<double> t1s(static_cast<std::size_t>(reps));
    std::vector<double> t2s(static_cast<std::size_t>(reps));

    parallel_chunks(reps, [&](int begin, int end) {
        constexpr int kBlock = 64;
        Matrix xi(n, kBlock), e(n, kBlock);
        for (int r0 = begin; r0 < end; r0 += kBlock) {
            const int w = std::min(kBlock, end - r0);
            for (int c = 0; c < w; ++c) {
                Stream stream(seed, kMcPurpose, static_cast<std::uint64_t>(r0 + c));
                for (Index i = 0; i < n; ++i)
                    xi(i, c) = law == ErrorLaw::normal ? stream.normal() : stream.two_point();
            }
            e.leftCols(w).noalias() = a * xi.leftCols(w);
            for (int c = 0; c < w; ++c) {
                const auto col = e.col(c).array();
                const double sumsq = (col * col).sum();
                t1s[static_cast<std::size_t>(r0 + c)] = (col * col * col * col).sum();
                t2s[static_cast<std::size_t>(r0 + c)] = sumsq * sumsq / static_cast<double>(n);
            }
        }
    });

    // Ordered reduction keeps the result independent of the chunking.
    const double cnt = static_cast<double>(reps);
    long double m1 = 0, m2 = 0;
    for (int r = 0; r < reps; ++r) {
        m1 += t1s[static_cast<std::size_t>(r)];
        m2 += t2s[static_cast<std::size_t>(r)];
    }
    const double mean1 = static_cast<double>(m1 / cnt), mean2 = static_cast<double>(m2 / cnt);
    long double v1 = 0, v2 = 0, cv = 0, q1 = 0, q2 = 0, qc = 0;
    for (int r = 0; r < reps; ++r) {
        const long double d1 = t1s[static_cast<std::size_t>(r)] - mean1;
        const long double d2 = t2s[static_cast<std::size_t>(r)] - mean2;
        v1 += d1 * d1;
        v2 += d2 * d2;
        cv += d1 * d2;
        q1 += d1 * d1 * d1 * d1;
        q2 += d2 * d2 * d2 * d2;
        qc += d1 * d1 * d2 * d2;
    }

    MonteCarloMoments out;
    out.estimates.ET1 = mean1;
    out.estimates.ET2 = mean2;
    out.estimates.VarT1 = static_cast<double>(v1 / (cnt - 1));
    out.estimates.VarT2 = static_cast<double>(v2 / (cnt - 1));
    out.estimates.Cov = static_cast<double>(cv / (cnt - 1));
    out.standard_errors.ET1 = std::sqrt(out.estimates.VarT1 / cnt);
    out.standard_errors.ET2 = std::sqrt(out.estimates.VarT2 / cnt);
    const double var1 = out.estimates.VarT1, var2 = out.estimates.VarT2;
    out.standard_errors.VarT1 =
        std::sqrt(std::max(0.0, static_cast<double>(q1 / cnt) - var1 * var1) / cnt);
    out.standard_errors.VarT2 =
        std::sqrt(std::max(0.0, static_cast<double>(q2 / cnt) - var2 * var2) / cnt);
    out.standard_errors.Cov = std::sqrt(
        std::max(0.0, static_cast<double>(qc / cnt) - out.estimates.Cov * out.estimates.Cov) /
        cnt);
    return out;
}

} // namespace fdcvt
