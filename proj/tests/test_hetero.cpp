#include <doctest.h>

#include "fdcvt/hetero_test.hpp"
#include "fdcvt/sim.hpp"

#include "test_support.hpp"

using namespace fdcvt;
using fdcvt_test::random_design;
using fdcvt_test::random_vector;
using fdcvt_test::rel_err;

TEST_SUITE_BEGIN("hetero");

TEST_CASE("equal squared residuals give T = 0") {
    Vector r(4);
    r << 1, -1, 1, -1;
    CHECK(cv_statistic(r) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("hand-computed values") {
    Vector r2(2);
    r2 << 0, 2;
    CHECK(cv_statistic(r2) == doctest::Approx(1.0).epsilon(1e-14));

    Vector r3(3);
    r3 << 1, 2, 3;
    CHECK(cv_statistic(r3) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("degenerate and undersized residual vectors") {
    CHECK_THROWS_AS(cv_statistic(Vector::Zero(5)), DegenerateResiduals);
    CHECK_THROWS_AS(cv_statistic(Vector::Ones(1)), DimensionMismatch);
}

TEST_CASE("scale invariance of the statistic") {
    const Vector r = random_vector(50, 70);
    const double t = cv_statistic(r);
    for (double c : {0.1, 10.0, -3.0}) {
        CHECK(rel_err(cv_statistic(c * r), t) < 1e-12);
    }
}

TEST_CASE("normal survival function") {
    CHECK(normal_sf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_sf(40.0) == 0.0);
    CHECK(normal_sf(1.644853626951) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(normal_sf(-1.0) + normal_sf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("run_test end to end on null data") {
    const auto design = random_design(64, 4, 71);
    const Vector eps = random_vector(64, 72);
    const auto report = run_test(design, eps, gaussian_profile());
    CHECK(report.n == 64);
    CHECK(report.p == 4);
    CHECK(report.b > 0.0);
    CHECK(report.p_value > 0.0);
    CHECK(report.p_value < 1.0);
    CHECK(report.p_value == doctest::Approx(normal_sf(report.z)).epsilon(1e-14));
    CHECK(report.profile_name == "gaussian");
}

TEST_CASE("exact fit raises DegenerateResiduals") {
    const auto design = random_design(10, 2, 73);
    const Vector y = design.entries() * random_vector(2, 74);
    CHECK_THROWS_AS(run_test(design, y, gaussian_profile()), DegenerateResiduals);
}

TEST_CASE("T does not depend on beta") {
    const auto design = random_design(40, 3, 75);
    const Vector eps = random_vector(40, 76);
    double t_ref = 0.0;
    for (int k = 0; k < 5; ++k) {
        const Vector beta = random_vector(3, 80 + k);
        const Vector y = design.entries() * beta + eps;
        const double t = cv_statistic(ols_fit(design, y).residuals);
        if (k == 0)
            t_ref = t;
        else
            CHECK(std::abs(t - t_ref) < 1e-10);
    }
}

TEST_CASE("scale-freeness through the full test") {
    const auto design = random_design(48, 4, 77);
    const Vector eps = random_vector(48, 78);
    const Vector beta = random_vector(4, 79);
    const auto prof = gaussian_profile();
    const double t1 = run_test(design, Vector(design.entries() * beta + eps), prof).T;
    for (double c : {0.1, 10.0}) {
        const double tc =
            run_test(design, Vector(design.entries() * beta + c * eps), prof).T;
        CHECK(std::abs(tc - t1) < 1e-9);
    }
}

TEST_CASE("p-value is strictly decreasing in T for fixed (a, b)") {
    const double a = 2.0, b = 0.04;
    double prev = 1.0;
    for (double t = 1.0; t < 3.0; t += 0.25) {
        const double p = normal_sf((t - a) / std::sqrt(b));
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("null z-scores are calibrated (fixed design, modest scale)") {
    // Smaller cousin of the acceptance criterion: n = 128, p = 16,
    // 1500 replications on one design. At this n the null law of T keeps a
    // visible right skew (it decays like n^{-1/2}), so the shape check
    // bounds the KS distance instead of demanding a KS pass.
    const Index n = 128, p = 16;
    const auto design = gen_design(DesignLaw::normal, n, p, 900);
    const auto pm = projection_matrix(design);
    const auto nm = null_moments(projection_functionals(pm), gaussian_profile(), n, p);

    std::vector<double> zs;
    zs.reserve(1500);
    for (int rep = 0; rep < 1500; ++rep) {
        const Vector eps = gen_errors(ErrorLaw::normal, n, substream(901, 0, rep));
        const double t = cv_statistic(ols_fit(design, eps).residuals);
        zs.push_back((t - nm.a) / std::sqrt(nm.b));
    }
    double mean = 0;
    for (double z : zs) mean += z;
    mean /= static_cast<double>(zs.size());
    double var = 0;
    for (double z : zs) var += (z - mean) * (z - mean);
    var /= static_cast<double>(zs.size() - 1);
    CHECK(std::abs(mean) < 0.12);
    CHECK(var > 0.8);
    CHECK(var < 1.25);
    const auto ks = ks_test_standard_normal(zs);
    CHECK(ks.statistic < 0.12);
}

TEST_CASE("two-point null z-scores pass a KS check at n = 512") {
    // With bounded errors the finite-n skew is mild enough for a clean KS
    // pass already at n = 512.
    const Index n = 512, p = 64;
    const auto design = gen_design(DesignLaw::normal, n, p, 137);
    const auto pm = projection_matrix(design);
    const auto nm = null_moments(projection_functionals(pm), two_point_profile(), n, p);
    std::vector<double> zs;
    zs.reserve(2000);
    for (int rep = 0; rep < 2000; ++rep) {
        const Vector eps = gen_errors(ErrorLaw::two_point, n, substream(138, 0, rep));
        const double t = cv_statistic(ols_fit(design, eps).residuals);
        zs.push_back((t - nm.a) / std::sqrt(nm.b));
    }
    const auto ks = ks_test_standard_normal(zs);
    CHECK(ks.p_value > 0.01);
}

TEST_SUITE_END();
