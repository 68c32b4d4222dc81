#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fdcvt/design.hpp"
#include "fdcvt/hetero_test.hpp"
#include "fdcvt/linalg.hpp"
#include "fdcvt/moments.hpp"
#include "fdcvt/parallel.hpp"
#include "fdcvt/rng.hpp"
#include "fdcvt/stats.hpp"

namespace fdcvt {

enum class Model { null_model, model1, model2 };

inline Model parse_model(const std::string& s) {
    if (s == "null") return Model::null_model;
    if (s == "model1") return Model::model1;
    if (s == "model2") return Model::model2;
    throw UnknownLaw("unknown model: " + s);
}

inline const char* to_string(Model m) {
    switch (m) {
        case Model::null_model: return "null";
        case Model::model1: return "model1";
        case Model::model2: return "model2";
    }
    return "?";
}

struct SimulationConfig {
    Index n = 0, p = 0;
    DesignLaw design_law = DesignLaw::normal;
    ErrorLaw error_law = ErrorLaw::normal;
    Model model = Model::null_model;
    int reps = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bool fixed_design = false;
};

struct SimulationResult {
    double rejection_rate = 0;
    double wilson_lo = 0, wilson_hi = 0;
    int reps_used = 0;
    double mean_T = 0;   // diagnostic
    double mean_a = 0;   // diagnostic
};

namespace sim_detail {

constexpr std::uint64_t kPurposeDesign = 1;
constexpr std::uint64_t kPurposeErrors = 2;
constexpr std::uint64_t kPurposeFixedDesign = 3;
constexpr std::uint64_t kPurposeRep = 4;

inline double draw_entry(Stream& s, DesignLaw law) {
    switch (law) {
        case DesignLaw::normal: return s.normal();
        case DesignLaw::t1: return s.cauchy();
        case DesignLaw::f32: return s.fisher_f(3, 2);
        case DesignLaw::lognormal_e_N53: return std::exp(5.0 + 3.0 * s.normal());
        case DesignLaw::gamma22: return s.gamma2(2.0);
        case DesignLaw::uniform01: return s.uniform();
        case DesignLaw::lognormal_scaled: return std::exp(5.0 + 3.0 * s.normal()) / 100.0;
    }
    throw UnknownLaw("unhandled design law");
}

} // namespace sim_detail

/// i.i.d. design draw, filled row by row; rank-checked with up to three
/// attempts on distinct substreams before giving up.
inline DesignMatrix gen_design(DesignLaw law, Index n, Index p, std::uint64_t seed) {
    if (n <= p || p < 1) throw DimensionMismatch("gen_design: need n > p >= 1");
    for (std::uint64_t attempt = 0; attempt < 3; ++attempt) {
        Stream stream(seed, sim_detail::kPurposeDesign, attempt);
        Matrix x(n, p);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < p; ++j) x(i, j) = sim_detail::draw_entry(stream, law);
        try {
            return DesignMatrix(std::move(x));
        } catch (const RankDeficient&) {
            continue;
        }
    }
    throw PersistentRankDeficiency("gen_design: three draws in a row were rank deficient");
}

/// i.i.d. unit-variance symmetric error draw.
inline Vector gen_errors(ErrorLaw law, Index n, std::uint64_t seed) {
    Stream stream(seed, sim_detail::kPurposeErrors, 0);
    Vector e(n);
    for (Index i = 0; i < n; ++i)
        e(i) = law == ErrorLaw::normal ? stream.normal() : stream.two_point();
    return e;
}

/// Heteroscedastic response: y_i = e_i (1 + x_i h) with h = (1, 0, ...) for
/// model 1 and h = (1_{p/2}, 0_{p/2}) for model 2; beta = 0 throughout (the
/// statistic is invariant to it). The null model returns the errors as is.
inline Vector apply_model(Model model, const Matrix& x, const Vector& errors) {
    if (errors.size() != x.rows()) throw DimensionMismatch("apply_model: length mismatch");
    switch (model) {
        case Model::null_model: return errors;
        case Model::model1:
            return errors.cwiseProduct(Vector::Ones(x.rows()) + x.col(0));
        case Model::model2: {
            if (x.cols() % 2 != 0)
                throw OddPForModel2("model 2 needs an even p, got " +
                                    std::to_string(x.cols()));
            const Vector scale =
                Vector::Ones(x.rows()) + x.leftCols(x.cols() / 2).rowwise().sum();
            return errors.cwiseProduct(scale);
        }
    }
    throw UnknownLaw("unhandled model");
}

namespace sim_detail {

/// Null moments straight from P, computing only the functionals whose
/// cumulant coefficients are nonzero. For a Gaussian profile that is O(n²)
/// past the projection; otherwise two dense products (H² and P P^∘3) using
/// route-collapsed forms of c2/m1/m2. Shares the moment assembly with
/// null_moments via a ProjectionSummary carrying zeros in unused fields.
inline NullMoments null_moments_from_projection(const Matrix& p, Index pcols,
                                                const ErrorMomentProfile& prof) {
    const Index n = p.rows();
    ProjectionSummary s;
    s.n = n;
    s.p = pcols;

    const Vector d = p.diagonal();
    const Matrix h = p.cwiseProduct(p);
    s.trP = d.sum();
    s.t1 = d.squaredNorm();
    s.q2 = h.squaredNorm();  // Σ p_ij⁴
    s.d2 = d.dot(h * d);

    if (!prof.is_gaussian_like()) {
        const Matrix p3 = h.cwiseProduct(p);
        Matrix h2(n, n), g(n, n);
        h2.noalias() = h * h;
        g.noalias() = p * p3;
        const Vector hd = h * d;
        const Vector p4row = h.cwiseProduct(h).rowwise().sum();
        s.q3 = h2.cwiseProduct(h).sum();
        s.q4 = h2.squaredNorm();
        s.d2sq = d.dot(h2 * d);
        s.m1 = d.dot(p.cwiseProduct(g).rowwise().sum());
        s.m2 = hd.dot(p4row);
        s.m3 = g.cwiseProduct(p3).sum();
        s.m4 = g.cwiseProduct(g.transpose()).sum();
        s.m5 = p4row.squaredNorm();
        s.c1 = g.trace();
        s.c2 = hd.dot(d);
        s.c3 = d.dot(p4row);
    }
    return null_moments(s, prof, n, pcols);
}

inline Matrix projection_from(const DesignMatrix& design) {
    const Matrix q = design.orthonormal_basis();
    Matrix p = Matrix::Identity(design.n(), design.n());
    p.selfadjointView<Eigen::Lower>().rankUpdate(q, -1.0);
    p.triangularView<Eigen::StrictlyUpper>() = p.transpose();
    return p;
}

} // namespace sim_detail

/// Empirical rejection rate of the level-alpha test over seeded
/// replications. Fresh design per replication by default; with
/// fixed_design one design is drawn and its null moments are reused.
/// Replications run in parallel over substreams keyed by replication
/// index; all aggregation is done in replication order afterwards, so the
/// result is identical for any worker count.
inline SimulationResult empirical_rate(const SimulationConfig& cfg) {
    if (cfg.n <= cfg.p || cfg.p < 1) throw DimensionMismatch("empirical_rate: need n > p >= 1");
    if (cfg.reps < 100) throw DimensionMismatch("empirical_rate: reps must be >= 100");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw DimensionMismatch("empirical_rate: alpha must be in (0,1)");
    if (cfg.model == Model::model2 && cfg.p % 2 != 0)
        throw OddPForModel2("model 2 needs an even p, got " + std::to_string(cfg.p));

    const ErrorMomentProfile profile =
        cfg.error_law == ErrorLaw::normal ? gaussian_profile() : two_point_profile();

    struct RepOutcome {
        double T = 0, a = 0;
        std::uint8_t rejected = 0;
    };
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.reps));

    // Shared state for the fixed-design protocol.
    std::optional<DesignMatrix> fixed;
    NullMoments fixed_nm;
    if (cfg.fixed_design) {
        fixed.emplace(gen_design(cfg.design_law, cfg.n, cfg.p,
                                 substream(cfg.seed, sim_detail::kPurposeFixedDesign, 0)));
        fixed_nm = sim_detail::null_moments_from_projection(sim_detail::projection_from(*fixed),
                                                            cfg.p, profile);
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;

    parallel_chunks(cfg.reps, [&](int begin, int end) {
        try {
            for (int rep = begin; rep < end; ++rep) {
                const std::uint64_t rep_key =
                    substream(cfg.seed, sim_detail::kPurposeRep, static_cast<std::uint64_t>(rep));
                const Vector errors = gen_errors(cfg.error_law, cfg.n, rep_key);

                double T, a, b;
                if (cfg.fixed_design) {
                    const Vector y = apply_model(cfg.model, fixed->entries(), errors);
                    T = cv_statistic(ols_fit(*fixed, y).residuals);
                    a = fixed_nm.a;
                    b = fixed_nm.b;
                } else {
                    const DesignMatrix design = gen_design(cfg.design_law, cfg.n, cfg.p, rep_key);
                    const Vector y = apply_model(cfg.model, design.entries(), errors);
                    T = cv_statistic(ols_fit(design, y).residuals);
                    const NullMoments nm = sim_detail::null_moments_from_projection(
                        sim_detail::projection_from(design), cfg.p, profile);
                    a = nm.a;
                    b = nm.b;
                }
                const double p_value = normal_sf((T - a) / std::sqrt(b));
                auto& out = outcomes[static_cast<std::size_t>(rep)];
                out.T = T;
                out.a = a;
                out.rejected = p_value < cfg.alpha ? 1 : 0;
            }
        } catch (...) {
            std::scoped_lock lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);

    long rejected = 0;
    long double sum_T = 0, sum_a = 0;
    for (const auto& out : outcomes) {
        rejected += out.rejected;
        sum_T += out.T;
        sum_a += out.a;
    }

    SimulationResult result;
    result.reps_used = cfg.reps;
    result.rejection_rate = static_cast<double>(rejected) / cfg.reps;
    const auto [lo, hi] = wilson_interval(rejected, cfg.reps);
    result.wilson_lo = lo;
    result.wilson_hi = hi;
    result.mean_T = static_cast<double>(sum_T / cfg.reps);
    result.mean_a = static_cast<double>(sum_a / cfg.reps);
    return result;
}

} // namespace fdcvt
