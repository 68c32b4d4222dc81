#pragma once

#include <cmath>
#include <string>

#include "fdcvt/design.hpp"
#include "fdcvt/linalg.hpp"

namespace fdcvt {

/// Scalar trace functionals of the residual-maker P that enter the null
/// moments of the statistic. Notation: H = P∘P (entrywise square), D_P the
/// diagonal part of P, Diag(P) its diagonal as a vector, 1 the ones vector.
///
/// Powers written on a Hadamard square mean matrix powers: q2 = tr((P∘P)^2)
/// and so on; t1 = tr(P∘P) itself is the plain trace Σ p_ii².
struct ProjectionSummary {
    Index n = 0, p = 0;
    double trP = 0;    // tr P = n - p
    double t1 = 0;     // Σ_i p_ii²
    double q2 = 0;     // tr((P∘P)²) = Σ_ij p_ij⁴
    double q3 = 0;     // tr((P∘P)³)
    double q4 = 0;     // tr((P∘P)⁴)
    double d2 = 0;     // Diag'(P) (P∘P) Diag(P)
    double d2sq = 0;   // Diag'(P) (P∘P)² Diag(P)
    double m1 = 0;     // tr(P D_P P P^∘3)
    double m2 = 0;     // tr((P D_P P) ∘ (P^∘2 P^∘2))
    double m3 = 0;     // tr(P P^∘3 P^∘3)
    double m4 = 0;     // tr((P^∘3 P)²)
    double m5 = 0;     // 1' (P^∘4 P^∘4) 1
    double c1 = 0;     // tr(P P^∘3)        (algebraically = q2)
    double c2 = 0;     // tr((P D_P P) ∘ P) (algebraically = d2)
    double c3 = 0;     // Diag'(P) P^∘4 1
};

namespace functionals_detail {

inline void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DimensionMismatch(std::string("non-finite functional: ") + what);
}

} // namespace functionals_detail

/// Evaluate every ProjectionSummary field from its defining matrix
/// expression. Dense products: H², P·P^∘3 and P·D_P·P, each O(n³).
/// The two independent readings of q2 (matrix square of H vs Σ p_ij⁴) must
/// agree to 1e-8 relative or the input is rejected as inconsistent.
inline ProjectionSummary projection_functionals(const ProjectionMatrix& pm) {
    const Matrix& p = pm.matrix();
    const Index n = pm.n();
    ProjectionSummary s;
    s.n = n;
    s.p = pm.p();

    const Vector d = p.diagonal();
    const Matrix h = p.cwiseProduct(p);    // P∘P
    const Matrix p3 = h.cwiseProduct(p);   // P^∘3
    const Matrix p4 = h.cwiseProduct(h);   // P^∘4

    Matrix h2(n, n), g(n, n), pdp(n, n);
    h2.noalias() = h * h;
    g.noalias() = p * p3;                          // (P P^∘3)_ik = Σ_j p_ij p_jk³
    pdp.noalias() = (p * d.asDiagonal()) * p;      // P D_P P

    s.trP = d.sum();
    s.t1 = d.squaredNorm();
    s.q2 = h2.trace();
    const double q2_direct = p4.sum();             // 1' P^∘4 1
    if (relative_gap(s.q2, q2_direct) > 1e-8)
        throw DimensionMismatch("projection_functionals: the two tr((P∘P)²) routes disagree");

    s.q3 = h2.cwiseProduct(h).sum();               // tr(H³), H symmetric
    s.q4 = h2.squaredNorm();                       // tr(H⁴) = ||H²||_F²
    s.d2 = d.dot(h * d);
    s.d2sq = d.dot(h2 * d);
    s.m1 = pdp.cwiseProduct(p3).sum();             // tr(P D_P P P^∘3), P^∘3 symmetric
    s.m2 = pdp.diagonal().dot(p4.rowwise().sum()); // (P^∘2 P^∘2)_jj = Σ_i p_ij⁴
    s.m3 = g.cwiseProduct(p3).sum();               // tr(G P^∘3)
    s.m4 = g.cwiseProduct(g.transpose()).sum();    // tr(G²) = tr((P^∘3 P)²)
    s.m5 = p4.rowwise().sum().squaredNorm();
    s.c1 = g.trace();
    s.c2 = pdp.diagonal().dot(d);
    s.c3 = d.dot(p4.rowwise().sum());

    for (double v : {s.q2, s.q3, s.q4, s.m1, s.m2, s.m3, s.m4, s.m5, s.c1, s.c2, s.c3,
                     s.d2, s.d2sq, s.t1})
        functionals_detail::check_finite(v, "projection summary");
    return s;
}

/// The same functionals for the heteroscedastic map A = P diag(σ),
/// B = A A'. Field names follow the variance/covariance expansion of the
/// two base statistics: the g* fields are the ten Var T₁ terms, vt2_* the
/// two Var T₂ terms, cov_* the four covariance terms.
struct GeneralSummary {
    Index n = 0;
    double trB = 0;    // tr B = Σ_i p_ii σ_i²
    double trB2 = 0;   // tr B²
    double tBB = 0;    // tr(B∘B) = Σ_i b_ii²
    double tAA = 0;    // Σ_j (A'A)_jj². The nu4 weight in E T2 / Var T2
                       // attaches to this column form, not to tBB; the two
                       // coincide exactly when A is symmetric (sigma = const)
                       // and the exact enumeration settles the general case.
    double sA4 = 0;    // Σ_ij a_ij⁴ = tr((A∘A)'(A∘A))
    double gd2 = 0;    // Diag'(B)(B∘B)Diag(B)
    double gq2 = 0;    // tr((B∘B)²)
    double gm1 = 0;    // Σ b_ii b_ik (A A'^∘3)_ik          [tr B D_B A A'^∘3]
    double gd2sq = 0;  // Diag'(B)(A∘A)(A∘A)'Diag(B)
    double gq3 = 0;    // tr((B∘B)(A∘A)(A∘A)')
    double gm4 = 0;    // tr((A^∘3 A')²)
    double gq4 = 0;    // tr(((A∘A)(A∘A)')²)
    double gm3 = 0;    // tr(B A^∘3 A'^∘3)
    double gm2 = 0;    // tr((A' D_B A) ∘ (A'^∘2 A^∘2))
    double gm5 = 0;    // 1' A^∘4 A'^∘4 1
    double vt2_1 = 0;  // (tr B)² tr B²
    double vt2_2 = 0;  // tAA (tr B)²
    double cov_bb = 0;  // tr(B²∘B)
    double cov_ba3 = 0; // tr(B A A'^∘3)
    double cov_dba = 0; // tr((A' D_B A) ∘ (A'A))
    double cov_da4 = 0; // Diag(A'A)' A'^∘4 1
};

/// Matrix-expression evaluation of every GeneralSummary field for an
/// arbitrary square A (B = A A'). This is the reference route the Omega
/// index-sum oracle is checked against.
inline GeneralSummary general_functionals_of(const Matrix& a) {
    const Index n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("general_functionals_of: A must be square");
    const Matrix a2 = a.cwiseProduct(a);
    const Matrix a3 = a2.cwiseProduct(a);
    const Matrix a4 = a2.cwiseProduct(a2);

    Matrix b(n, n), c(n, n), m2p(n, n), m3p(n, n);
    b.noalias() = a * a.transpose();
    c.noalias() = a * a3.transpose();      // C_uv = Σ_j a_uj a_vj³
    m2p.noalias() = a2 * a2.transpose();   // (A∘A)(A∘A)'
    m3p.noalias() = a3 * a3.transpose();   // A^∘3 A'^∘3

    const Vector db = b.diagonal();
    const Vector a2col = a2.colwise().sum();  // Diag(A'A)
    const Vector a4col = a4.colwise().sum();  // A'^∘4 1

    GeneralSummary s;
    s.n = n;
    s.trB = db.sum();
    s.trB2 = b.squaredNorm();
    s.tBB = db.squaredNorm();
    s.tAA = a2col.squaredNorm();
    s.sA4 = a4.sum();
    s.gd2 = db.dot(b.cwiseProduct(b) * db);
    s.gq2 = b.cwiseProduct(b).squaredNorm();
    s.gm1 = db.dot(b.cwiseProduct(c).rowwise().sum());
    s.gd2sq = db.dot(m2p * db);
    s.gq3 = b.cwiseProduct(b).cwiseProduct(m2p).sum();
    s.gm4 = c.cwiseProduct(c.transpose()).sum();  // tr(C²) with C' = A^∘3 A'
    s.gq4 = m2p.squaredNorm();
    s.gm3 = b.cwiseProduct(m3p).sum();
    s.gm2 = (a2.transpose() * db).dot(a4col);
    s.gm5 = a4col.squaredNorm();
    s.vt2_1 = s.trB * s.trB * s.trB2;
    s.vt2_2 = s.tAA * s.trB * s.trB;
    s.cov_bb = db.dot(b.colwise().squaredNorm().transpose());  // (B²)_jj = ||B col j||²
    s.cov_ba3 = b.cwiseProduct(c.transpose()).sum();           // tr(B C)
    s.cov_dba = (a2.transpose() * db).dot(a2col);
    s.cov_da4 = a2col.dot(a4col);

    for (double v : {s.trB2, s.tBB, s.sA4, s.gd2, s.gq2, s.gm1, s.gd2sq, s.gq3, s.gm4,
                     s.gq4, s.gm3, s.gm2, s.gm5, s.cov_bb, s.cov_ba3, s.cov_dba, s.cov_da4})
        functionals_detail::check_finite(v, "general summary");
    return s;
}

/// Functionals of A = P diag(sigma) for a strictly positive sigma.
/// With sigma identically 1 every shared field reduces to its
/// ProjectionSummary counterpart.
inline GeneralSummary general_functionals(const ProjectionMatrix& pm, const Vector& sigma) {
    const Index n = pm.n();
    if (sigma.size() != n)
        throw DimensionMismatch("general_functionals: sigma length mismatch");
    for (Index i = 0; i < n; ++i)
        if (!(sigma(i) > 0.0))
            throw NonPositiveSigma("sigma[" + std::to_string(i) + "] = " +
                                   std::to_string(sigma(i)) + " must be > 0");
    GeneralSummary s = general_functionals_of(pm.matrix() * sigma.asDiagonal());
    if (relative_gap(s.trB, pm.matrix().diagonal().dot(sigma.cwiseProduct(sigma))) > 1e-8)
        throw DimensionMismatch("general_functionals: tr B deviates from Σ p_ii σ_i²");
    return s;
}

} // namespace fdcvt
