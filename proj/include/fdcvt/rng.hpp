#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "fdcvt/errors.hpp"

namespace fdcvt {

/// Error laws are standardized (mean 0, variance 1) and symmetric.
enum class ErrorLaw { normal, two_point };

/// Entry distributions for simulated design matrices.
enum class DesignLaw {
    normal,            // N(0,1)
    t1,                // t with 1 degree of freedom (Cauchy)
    f32,               // F(3,2)
    lognormal_e_N53,   // exp(N(5,3))
    gamma22,           // Gamma(shape 2, scale 2)
    uniform01,         // U(0,1)
    lognormal_scaled,  // exp(N(5,3)) / 100
};

inline ErrorLaw parse_error_law(const std::string& s) {
    if (s == "normal") return ErrorLaw::normal;
    if (s == "two_point") return ErrorLaw::two_point;
    throw UnknownLaw("unknown error law: " + s);
}

inline DesignLaw parse_design_law(const std::string& s) {
    if (s == "normal") return DesignLaw::normal;
    if (s == "t1") return DesignLaw::t1;
    if (s == "f32") return DesignLaw::f32;
    if (s == "lognormal") return DesignLaw::lognormal_e_N53;
    if (s == "gamma22") return DesignLaw::gamma22;
    if (s == "uniform01") return DesignLaw::uniform01;
    if (s == "lognormal_scaled") return DesignLaw::lognormal_scaled;
    throw UnknownLaw("unknown design law: " + s);
}

inline const char* to_string(ErrorLaw law) {
    return law == ErrorLaw::normal ? "normal" : "two_point";
}

inline const char* to_string(DesignLaw law) {
    switch (law) {
        case DesignLaw::normal: return "normal";
        case DesignLaw::t1: return "t1";
        case DesignLaw::f32: return "f32";
        case DesignLaw::lognormal_e_N53: return "lognormal";
        case DesignLaw::gamma22: return "gamma22";
        case DesignLaw::uniform01: return "uniform01";
        case DesignLaw::lognormal_scaled: return "lognormal_scaled";
    }
    return "?";
}

namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace rng_detail

/// Derive an independent substream id. Streams are keyed by
/// (seed, a, b) so replications, purposes and retry attempts never share
/// a generator state, independent of the order they are consumed in.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t x = rng_detail::splitmix64(s) ^ (a * 0xD1B54A32D192ED03ULL);
    std::uint64_t y = rng_detail::splitmix64(x) ^ (b * 0x8CB92BA72F3D8DD7ULL);
    return rng_detail::splitmix64(y);
}

/// xoshiro256++ generator seeded from a 64-bit stream key via SplitMix64.
/// Cheap to construct, so one fresh Stream per replication is the norm.
class Stream {
public:
    explicit Stream(std::uint64_t key) {
        for (auto& w : state_) w = rng_detail::splitmix64(key);
    }
    Stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
        : Stream(substream(seed, a, b)) {}

    std::uint64_t next_u64() {
        using rng_detail::rotl;
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0,1); never returns 0 so logs are safe.
    double uniform() {
        for (;;) {
            const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

    /// Rademacher +/-1 with probability 1/2 each.
    double two_point() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    double cauchy() { return std::tan(std::numbers::pi * (uniform() - 0.5)); }

    /// chi^2 with k degrees of freedom, k small (sum of squared normals).
    double chi_squared(int k) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            const double z = normal();
            s += z * z;
        }
        return s;
    }

    double fisher_f(int d1, int d2) {
        return (chi_squared(d1) / d1) / (chi_squared(d2) / d2);
    }

    /// Gamma(shape 2, scale s) as a sum of two exponentials.
    double gamma2(double scale) {
        return -scale * (std::log(uniform()) + std::log(uniform()));
    }

private:
    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace fdcvt
