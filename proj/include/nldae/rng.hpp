#pragma once

// Deterministic, splittable random streams.
//
// Generator: xoshiro256** (Blackman & Vigna), seeded through splitmix64 so
// that no seed (including 0) yields the forbidden all-zero state. A child
// stream is keyed by hashing the parent's current state together with a split
// label; the parent is not advanced.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "nldae/errors.hpp"

namespace nldae {

namespace detail {

constexpr std::uint64_t splitmix64_next(std::uint64_t& x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept { reseed(seed); }

    /// Next raw 64-bit output.
    std::uint64_t next() noexcept {
        const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Child stream for `label`. Pure in (current state, label).
    RngStream split(std::uint64_t label) const {
        std::uint64_t key = label ^ 0xD1B54A32D192ED03ULL;
        std::uint64_t h = detail::splitmix64_next(key);
        for (std::uint64_t w : s_) {
            std::uint64_t mix = w ^ h;
            h = detail::splitmix64_next(mix);
        }
        RngStream child(h);
        child.lineage_ = lineage_;
        child.lineage_.push_back(label);
        return child;
    }

    const std::vector<std::uint64_t>& lineage() const noexcept { return lineage_; }

    friend bool operator==(const RngStream& a, const RngStream& b) noexcept {
        return a.s_ == b.s_;
    }

private:
    void reseed(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& w : s_) w = detail::splitmix64_next(x);
    }

    std::array<std::uint64_t, 4> s_{};
    std::vector<std::uint64_t> lineage_;
};

inline RngStream rng_new(std::uint64_t seed) { return RngStream(seed); }

inline RngStream split(const RngStream& parent, std::uint64_t label) {
    return parent.split(label);
}

/// Uniform on [lo, hi); returns lo when lo == hi.
inline double sample_uniform(RngStream& r, double lo, double hi) {
    if (!(lo <= hi)) throw ParameterError("sample_uniform: lo > hi");
    if (lo == hi) return lo;
    const double v = lo + (hi - lo) * r.next_unit();
    return v < hi ? v : std::nextafter(hi, lo);
}

/// Box-Muller (cosine branch only, so a draw consumes exactly two outputs).
inline double sample_standard_normal(RngStream& r) {
    const double u1 = 1.0 - r.next_unit();  // (0, 1]
    const double u2 = r.next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double sample_normal(RngStream& r, double mean, double std) {
    if (!(std >= 0.0)) throw ParameterError("sample_normal: std < 0");
    if (std == 0.0) return mean;
    return mean + std * sample_standard_normal(r);
}

/// CN(0, variance): independent real/imaginary parts, each N(0, variance/2).
inline std::complex<double> sample_complex_normal(RngStream& r, double variance) {
    if (!(variance >= 0.0)) throw ParameterError("sample_complex_normal: variance < 0");
    if (variance == 0.0) return {0.0, 0.0};
    const double s = std::sqrt(variance / 2.0);
    const double re = s * sample_standard_normal(r);
    const double im = s * sample_standard_normal(r);
    return {re, im};
}

/// Inverse-CDF exponential with the given rate.
inline double sample_exponential(RngStream& r, double rate) {
    if (!(rate > 0.0)) throw ParameterError("sample_exponential: rate <= 0");
    const double u = 1.0 - r.next_unit();  // (0, 1]
    return -std::log(u) / rate;
}

inline int sample_bernoulli(RngStream& r, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("sample_bernoulli: p outside [0,1]");
    return r.next_unit() < p ? 1 : 0;
}

}  // namespace nldae
