// Acceptance suite: one line per criterion, exit 0 iff every required
// criterion passes. Criterion 10 (external datasets) is optional and
// reports SKIP when the files have not been fetched.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iterator>
#include <optional>
#include <string>
#include <sys/stat.h>
#include <vector>

#include "fdcvt/fdcvt.hpp"

using namespace fdcvt;

namespace {

struct Outcome {
    bool pass = true;
    bool skipped = false;
    std::string detail;
};

double rel(double got, double want) { return relative_gap(got, want); }

Matrix random_gaussian(Index rows, Index cols, std::uint64_t seed) {
    Stream s(seed, 0xACC, 0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = s.normal();
    return m;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------- 1
Outcome criterion_exact_oracle() {
    const auto profile = two_point_profile();
    double worst = 0;
    int checks = 0;
    const Index ns[] = {6, 8, 10};
    const Index ps[] = {1, 2, 3};
    for (int d = 0; d < 20; ++d) {
        const Index n = ns[d % 3];
        const Index p = ps[(d / 3) % 3];
        const DesignMatrix design{random_gaussian(n, p, 7000 + d)};
        const auto pm = projection_matrix(design);
        for (bool half2 : {false, true}) {
            Vector sigma = Vector::Ones(n);
            if (half2) sigma.tail(n / 2).setConstant(2.0);
            const auto gsum = general_functionals(pm, sigma);
            const auto gm = general_moments(gsum, profile, n);
            const auto oracle = enumerate_two_point(pm.matrix() * sigma.asDiagonal());
            for (auto [got, want] : {std::pair{gm.ET1, oracle.ET1},
                                     std::pair{gm.ET2, oracle.ET2},
                                     std::pair{gm.VarT1, oracle.VarT1}}) {
                worst = std::max(worst, rel(got, want));
                ++checks;
            }
            if (rel(gm.VarT1, oracle.VarT1) >= 1e-8) {
                // Coefficient-level isolation: report which Omega term broke.
                const Matrix a = pm.matrix() * sigma.asDiagonal();
                const auto pats = var_t1_patterns();
                const double fields[] = {gsum.gd2, gsum.gq2, gsum.gm1, gsum.gd2sq, gsum.gq3,
                                         gsum.gm4, gsum.gq4, gsum.gm3, gsum.gm2, gsum.gm5};
                std::string bad;
                for (std::size_t i = 0; i < pats.size(); ++i) {
                    const double naive = naive_omega_sum(a, pats[i].pattern);
                    if (rel(fields[i], naive) > 1e-10)
                        bad += fmt(" [%s: closed=%.12g naive=%.12g]", pats[i].name, fields[i],
                                   naive);
                }
                return {false, false,
                        fmt("VarT1 mismatch at n=%ld p=%ld half2=%d;%s", long(n), long(p),
                            int(half2), bad.empty() ? " all terms match naive sums" : bad.c_str())};
            }
        }
    }
    return {worst < 1e-8, false,
            fmt("%d moment comparisons, worst relative error %.2e (gate 1e-8)", checks, worst)};
}

// ---------------------------------------------------------------- 2
Outcome criterion_omega_identities() {
    const auto pats = var_t1_patterns();
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        const Index n = 6 + k % 5;  // 6..10
        const Matrix a = random_gaussian(n, n, 7100 + k);
        const auto g = general_functionals_of(a);
        const double fields[] = {g.gd2, g.gq2, g.gm1, g.gd2sq, g.gq3,
                                 g.gm4, g.gq4, g.gm3, g.gm2, g.gm5};
        for (std::size_t i = 0; i < pats.size(); ++i) {
            const double err = rel(fields[i], naive_omega_sum(a, pats[i].pattern));
            worst = std::max(worst, err);
            if (err >= 1e-10)
                return {false, false, fmt("identity '%s' off by %.2e", pats[i].name, err)};
        }
    }
    return {true, false, fmt("10 identities x 20 matrices, worst relative error %.2e", worst)};
}

// ---------------------------------------------------------------- 3
Outcome criterion_limits() {
    const Index n1 = 1000;
    const auto nm = null_moments(
        projection_functionals(projection_matrix(DesignMatrix{Matrix::Ones(n1, 1)})),
        gaussian_profile(), n1, 1);
    const double gap_a = std::abs(nm.a - 2.0);

    const Index n2 = 2000;
    const auto pm2 = projection_matrix(DesignMatrix{Matrix::Ones(n2, 1)});
    Vector sigma = Vector::Ones(n2);
    sigma.tail(n2 / 2).setConstant(2.0);
    const auto gm = general_moments(general_functionals(pm2, sigma), gaussian_profile(), n2);
    const double gap_m = std::abs(gm.predicted_mean_T - 3.08);

    const bool pass = gap_a <= 0.01 && gap_m <= 0.02;
    return {pass, false,
            fmt("a(n=1000)=%.6f (|a-2|=%.4f <= 0.01), predicted mean(n=2000)=%.4f "
                "(|.-3.08|=%.4f <= 0.02)",
                nm.a, gap_a, gm.predicted_mean_T, gap_m)};
}

// ---------------------------------------------------------------- 4
Outcome criterion_table1() {
    auto mean_t1 = [](DesignLaw law) {
        double total = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto design = gen_design(law, 1000, 200, seed);
            total += projection_matrix(design).matrix().diagonal().squaredNorm();
        }
        return total / 10.0;
    };
    const double t1_normal = mean_t1(DesignLaw::normal);
    const double t1_logn = mean_t1(DesignLaw::lognormal_scaled);
    const bool pass = t1_normal >= 638.0 && t1_normal <= 643.0 && t1_logn >= 690.0 &&
                      t1_logn <= 725.0;
    return {pass, false,
            fmt("mean tr(P∘P): normal %.1f (band [638,643]), lognormal/100 %.1f (band [690,725])",
                t1_normal, t1_logn)};
}

// ---------------------------------------------------------------- 5
Outcome criterion_table2_size() {
    std::string detail;
    bool pass = true;
    for (Index p : {4, 64, 256}) {
        SimulationConfig cfg;
        cfg.n = 512;
        cfg.p = p;
        cfg.reps = 5000;
        cfg.seed = 20 + static_cast<std::uint64_t>(p);
        const auto res = empirical_rate(cfg);
        const bool ok = res.rejection_rate >= 0.040 && res.rejection_rate <= 0.075;
        pass = pass && ok;
        detail += fmt("p=%ld: %.4f%s ", long(p), res.rejection_rate, ok ? "" : "(!)");
    }
    return {pass, false, detail + "(band [0.040,0.075], 5000 reps each)"};
}

// ---------------------------------------------------------------- 6
Outcome criterion_tables34_power() {
    std::string detail;
    bool pass = true;
    for (Model model : {Model::model1, Model::model2}) {
        for (Index p : {16, 128}) {
            SimulationConfig cfg;
            cfg.n = 512;
            cfg.p = p;
            cfg.model = model;
            cfg.reps = 2000;
            cfg.seed = 40 + static_cast<std::uint64_t>(p);
            const auto res = empirical_rate(cfg);
            const bool ok = res.rejection_rate >= 0.99;
            pass = pass && ok;
            detail += fmt("%s/p=%ld: %.4f%s ", to_string(model), long(p), res.rejection_rate,
                          ok ? "" : "(!)");
        }
    }
    return {pass, false, detail + "(gate >= 0.99, 2000 reps each)"};
}

// ---------------------------------------------------------------- 7
Outcome criterion_table5_two_point() {
    std::string detail;
    bool pass = true;
    for (Index p : {16, 128}) {
        SimulationConfig cfg;
        cfg.n = 512;
        cfg.p = p;
        cfg.error_law = ErrorLaw::two_point;
        cfg.reps = 2000;
        cfg.seed = 60 + static_cast<std::uint64_t>(p);
        const auto size = empirical_rate(cfg);
        const bool ok_size = size.rejection_rate >= 0.040 && size.rejection_rate <= 0.090;
        cfg.model = Model::model2;
        const auto power = empirical_rate(cfg);
        const bool ok_power = power.rejection_rate >= 0.99;
        pass = pass && ok_size && ok_power;
        detail += fmt("p=%ld: size %.4f%s power %.4f%s ", long(p), size.rejection_rate,
                      ok_size ? "" : "(!)", power.rejection_rate, ok_power ? "" : "(!)");
    }
    return {pass, false, detail + "(size [0.040,0.090], power >= 0.99)"};
}

// ---------------------------------------------------------------- 8
Outcome criterion_z_calibration() {
    auto z_scores = [](Index n, Index p, int reps, std::uint64_t seed) {
        const auto design = gen_design(DesignLaw::normal, n, p, seed);
        const auto nm = null_moments(projection_functionals(projection_matrix(design)),
                                     gaussian_profile(), n, p);
        std::vector<double> zs;
        zs.reserve(reps);
        for (int rep = 0; rep < reps; ++rep) {
            const Vector eps = gen_errors(ErrorLaw::normal, n, substream(seed + 1, 0, rep));
            const double t = cv_statistic(ols_fit(design, eps).residuals);
            zs.push_back((t - nm.a) / std::sqrt(nm.b));
        }
        return zs;
    };

    const auto zs = z_scores(512, 64, 5000, 880);
    double mean = 0;
    for (double z : zs) mean += z;
    mean /= static_cast<double>(zs.size());
    double var = 0, skew = 0;
    for (double z : zs) var += (z - mean) * (z - mean);
    var /= static_cast<double>(zs.size() - 1);
    for (double z : zs) skew += std::pow((z - mean) / std::sqrt(var), 3);
    skew /= static_cast<double>(zs.size());
    const auto ks = ks_test_standard_normal(zs);

    const bool mean_ok = std::abs(mean) <= 0.05;
    const bool var_ok = var >= 0.9 && var <= 1.1;
    const bool ks_ok = ks.p_value >= 0.01;

    std::string detail = fmt("mean(z)=%.4f%s var(z)=%.4f%s KS p=%.2e%s", mean,
                             mean_ok ? "" : "(!)", var, var_ok ? "" : "(!)", ks.p_value,
                             ks_ok ? "" : "(!)");
    if (!ks_ok) {
        // The failure is a property of the finite-n null law, not of (a, b):
        // T keeps a right skew that decays like n^{-1/2} and a 5000-sample KS
        // detects it at n=512. Evidence: the same pipeline passes at larger n
        // and with bounded (two-point) errors at this n.
        const auto zs2 = z_scores(3072, 384, 3000, 881);
        const auto ks2 = ks_test_standard_normal(zs2);

        const auto design = gen_design(DesignLaw::normal, 512, 64, 884);
        const auto nm = null_moments(projection_functionals(projection_matrix(design)),
                                     two_point_profile(), 512, 64);
        std::vector<double> zs3;
        zs3.reserve(5000);
        for (int rep = 0; rep < 5000; ++rep) {
            const Vector eps = gen_errors(ErrorLaw::two_point, 512, substream(885, 0, rep));
            zs3.push_back((cv_statistic(ols_fit(design, eps).residuals) - nm.a) /
                          std::sqrt(nm.b));
        }
        const auto ks3 = ks_test_standard_normal(zs3);
        detail += fmt(" | null skew %.2f at n=512 decays ~n^{-1/2}: same pipeline at n=3072 "
                      "KS p=%.3f, two-point errors at n=512 KS p=%.3f",
                      skew, ks2.p_value, ks3.p_value);
    }
    return {mean_ok && var_ok && ks_ok, false, detail};
}

// ---------------------------------------------------------------- 9
Outcome criterion_invariances() {
    double worst_scale = 0, worst_beta = 0, worst_colspace = 0, worst_ident = 0;
    for (int k = 0; k < 100; ++k) {
        // T scale-freeness through the full test, and beta invariance.
        const Index n = 48 + (k % 4) * 8;
        const Index p = 3 + k % 3;
        const DesignMatrix design{random_gaussian(n, p, 9000 + k)};
        Stream s(9100 + k, 0, 0);
        Vector eps(n);
        for (Index i = 0; i < n; ++i) eps(i) = s.normal();
        Vector beta1(p), beta2(p);
        for (Index i = 0; i < p; ++i) {
            beta1(i) = s.normal();
            beta2(i) = s.normal();
        }
        const double t_base =
            cv_statistic(ols_fit(design, Vector(design.entries() * beta1 + eps)).residuals);
        for (double c : {0.1, 10.0}) {
            const double t_scaled = cv_statistic(
                ols_fit(design, Vector(design.entries() * beta1 + c * eps)).residuals);
            worst_scale = std::max(worst_scale, std::abs(t_scaled - t_base));
        }
        const double t_beta =
            cv_statistic(ols_fit(design, Vector(design.entries() * beta2 + eps)).residuals);
        worst_beta = std::max(worst_beta, std::abs(t_beta - t_base));

        // Column-space invariance of every functional, and the two identities.
        const Index nc = 24, pc = 4;
        const DesignMatrix base{random_gaussian(nc, pc, 9200 + k)};
        Matrix g = random_gaussian(pc, pc, 9300 + k) + 3.0 * Matrix::Identity(pc, pc);
        const DesignMatrix mixed{base.entries() * g};
        const auto s1 = projection_functionals(projection_matrix(base));
        const auto s2 = projection_functionals(projection_matrix(mixed));
        for (auto field : {&ProjectionSummary::trP, &ProjectionSummary::t1,
                           &ProjectionSummary::q2, &ProjectionSummary::q3,
                           &ProjectionSummary::q4, &ProjectionSummary::d2,
                           &ProjectionSummary::d2sq, &ProjectionSummary::m1,
                           &ProjectionSummary::m2, &ProjectionSummary::m3,
                           &ProjectionSummary::m4, &ProjectionSummary::m5,
                           &ProjectionSummary::c1, &ProjectionSummary::c2,
                           &ProjectionSummary::c3})
            worst_colspace = std::max(worst_colspace, rel(s1.*field, s2.*field));
        worst_ident = std::max({worst_ident, rel(s1.c1, s1.q2), rel(s1.c2, s1.d2)});
    }
    const bool pass = worst_scale <= 1e-9 && worst_beta <= 1e-10 && worst_colspace <= 1e-8 &&
                      worst_ident <= 1e-10;
    return {pass, false,
            fmt("scale %.1e (<=1e-9), beta %.1e (<=1e-10), column-space %.1e (<=1e-8), "
                "identities %.1e (<=1e-10); 100 instances each",
                worst_scale, worst_beta, worst_colspace, worst_ident)};
}

// ---------------------------------------------------------------- 10
Outcome criterion_real_data() {
    struct Case {
        const char* path;
        const char* response;
        double expect;
    };
    const Case cases[] = {
        {"data/external/deathrate.csv", "mortality", 0.4994},
        {"data/external/mortgage.csv", "rate_30y", 0.4439},
    };
    std::string detail;
    bool any = false, pass = true;
    for (const Case& c : cases) {
        const std::string path = std::string(FDCVT_SOURCE_DIR) + "/" + c.path;
        struct stat st{};
        if (stat(path.c_str(), &st) != 0) {
            detail += fmt("%s not fetched; ", c.path);
            continue;
        }
        any = true;
        const Dataset ds = load_csv(path);
        const Index resp = resolve_column(ds, c.response);
        Matrix x(ds.rows(), ds.cols());
        x.col(0).setOnes();
        Index col = 1;
        for (Index j = 0; j < ds.cols(); ++j)
            if (j != resp) x.col(col++) = ds.values.col(j);
        const auto report =
            run_test(DesignMatrix{std::move(x)}, Vector(ds.values.col(resp)), gaussian_profile());
        const bool ok = std::abs(report.p_value - c.expect) <= 0.001;
        pass = pass && ok;
        detail += fmt("%s: p=%.4f (expect %.4f±0.001)%s; ", c.path, report.p_value, c.expect,
                      ok ? "" : "(!)");
    }
    if (!any) return {true, true, "external datasets not present (tools/fetch_datasets.sh)"};
    return {pass, false, detail};
}

} // namespace

int main(int argc, char** argv) {
    struct Entry {
        const char* name;
        bool optional;
        std::function<Outcome()> fn;
    };
    const Entry entries[] = {
        {"exact-oracle equivalence (ET1, ET2, VarT1 vs 2^n enumeration)", false,
         criterion_exact_oracle},
        {"omega identity suite (naive sums vs matrix expressions)", false,
         criterion_omega_identities},
        {"asymptotic limits (a -> 2, predicted mean -> 3.08)", false, criterion_limits},
        {"tr(P∘P) by design law (n=1000, p=200, 10 draws)", false, criterion_table1},
        {"empirical size, normal errors (n=512, p in {4,64,256})", false, criterion_table2_size},
        {"empirical power, models 1-2 (n=512, p in {16,128})", false, criterion_tables34_power},
        {"two-point errors: size and power (n=512, p in {16,128})", false,
         criterion_table5_two_point},
        {"null z-calibration (n=512, p=64, 5000 reps)", false, criterion_z_calibration},
        {"invariance suite (scale, beta, column space, identities)", false,
         criterion_invariances},
        {"real-data reproduction (optional)", true, criterion_real_data},
    };

    // With no arguments every criterion runs; otherwise the arguments pick
    // criteria by 1-based index (used by CTest for per-criterion entries).
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty())
        for (int i = 1; i <= static_cast<int>(std::size(entries)); ++i) selected.push_back(i);

    std::printf("fdcvt acceptance suite\n");
    int failures = 0, ran = 0, skips = 0;
    for (int idx : selected) {
        if (idx < 1 || idx > static_cast<int>(std::size(entries))) {
            std::fprintf(stderr, "no criterion %d\n", idx);
            return 2;
        }
        const Entry& e = entries[idx - 1];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out = {false, false, std::string("exception: ") + ex.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const char* status = out.skipped ? "SKIP" : (out.pass ? "PASS" : "FAIL");
        ++ran;
        if (out.skipped) ++skips;
        if (!out.pass && !out.skipped && !e.optional) ++failures;
        std::printf("[%s] %2d. %s — %s [%.1f s]\n", status, idx, e.name, out.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    if (skips == ran) return 77;  // everything selected was skipped
    if (failures == 0) {
        std::printf("acceptance: all required criteria pass\n");
        return 0;
    }
    std::printf("acceptance: %d required criterion(s) failing\n", failures);
    return 1;
}
