#include <doctest.h>

#include <cmath>

#include "fdcvt/rng.hpp"
#include "fdcvt/stats.hpp"

using namespace fdcvt;

TEST_SUITE_BEGIN("rng");

TEST_CASE("streams are reproducible and keyed by (seed, a, b)") {
    Stream s1(42, 1, 2), s2(42, 1, 2), s3(42, 1, 3);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto a = s1.next_u64(), b = s2.next_u64(), c = s3.next_u64();
        all_equal = all_equal && (a == b);
        any_diff = any_diff || (a != c);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform stays inside the open unit interval") {
    Stream s(7, 0, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("two-point draws are signs") {
    Stream s(8, 0, 0);
    int pos = 0;
    for (int i = 0; i < 4000; ++i) {
        const double v = s.two_point();
        CHECK(std::abs(v) == 1.0);
        pos += v > 0;
    }
    CHECK(pos > 1800);
    CHECK(pos < 2200);
}

TEST_CASE("normal sample moments: variance 1, fourth moment near 3") {
    Stream s(9, 0, 0);
    const int n = 100000;
    double m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m2 /= n;
    m4 /= n;
    // SE(m4) = sqrt((M8 - M4^2)/n) = sqrt(96/n) ~ 0.031
    CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("law parsing round trips and rejects unknown names") {
    CHECK(parse_error_law("two_point") == ErrorLaw::two_point);
    CHECK(parse_design_law("lognormal_scaled") == DesignLaw::lognormal_scaled);
    CHECK_THROWS_AS(parse_error_law("cauchy"), UnknownLaw);
    CHECK_THROWS_AS(parse_design_law("t9"), UnknownLaw);
    for (DesignLaw law : {DesignLaw::normal, DesignLaw::t1, DesignLaw::f32,
                          DesignLaw::lognormal_e_N53, DesignLaw::gamma22,
                          DesignLaw::uniform01, DesignLaw::lognormal_scaled})
        CHECK(parse_design_law(to_string(law)) == law);
}

TEST_CASE("wilson interval sanity") {
    const auto [lo, hi] = wilson_interval(50, 1000);
    CHECK(lo > 0.03);
    CHECK(lo < 0.05);
    CHECK(hi > 0.05);
    CHECK(hi < 0.07);
    const auto [lo0, hi0] = wilson_interval(0, 100);
    CHECK(lo0 == 0.0);
    CHECK(hi0 > 0.0);
}

TEST_CASE("kolmogorov tail values") {
    // Known quantiles of the Kolmogorov distribution.
    CHECK(kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_sf(1.6276) == doctest::Approx(0.01).epsilon(1e-2));
    CHECK(kolmogorov_sf(0.0) == 1.0);
}

TEST_SUITE_END();
