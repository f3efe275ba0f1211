#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace interp {

// SplitMix64 finalizer. Bijective mix of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

// Derives an independent stream seed from (seed, index). Streams for distinct
// indices never share state, so trials and samples can be generated in any
// order (or concurrently) with identical results.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index + kGoldenGamma));
}

constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_stream(derive_stream(seed, a), b);
}

// Counter-based 64-bit generator (SplitMix64): the state is a counter advanced
// by a fixed gamma and the output is a hash of the counter. Fully specified so
// fixtures are bit-reproducible across implementations. Normal variates come
// from Box-Muller on pairs of uniforms.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; used as the log argument in Box-Muller.
    double next_double_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_double_open();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace interp
