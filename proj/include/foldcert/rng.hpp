#pragma once

#include <cstdint>

namespace foldcert {

/// xoshiro256** with splitmix64 seeding. Implemented here (rather than
/// <random>) because std::uniform_real_distribution is not guaranteed to
/// produce the same stream across standard libraries, and the toolkit
/// promises byte-identical outputs for a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (polar form avoided to keep the
    /// consumption of the stream fixed per call pair).
    double normal();

    /// Stream for sample `index` derived from a master seed; samples are
    /// independent of evaluation order.
    static Rng for_sample(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(splitmix_once(master_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1))));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t splitmix_once(std::uint64_t x) { return splitmix64(x); }

    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// Default seed used by the CLI when none is given (documented in README).
inline constexpr std::uint64_t kDefaultSeed = 24301;

}  // namespace foldcert
