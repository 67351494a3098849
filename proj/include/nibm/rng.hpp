#pragma once

#include <cmath>
#include <cstdint>

namespace nibm {

/// Counter-style splittable generator. Stream contract: stream(seed, id)
/// starts from state mix64(seed ^ (id + 1) * 0x9E3779B97F4A7C15); draws within
/// a stream are sequential. Identical (seed, id) always reproduces the same
/// sequence, independent of how other streams are consumed.
struct SplitMix64 {
    std::uint64_t state = 0;

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static SplitMix64 stream(std::uint64_t seed, std::uint64_t id) {
        SplitMix64 r;
        r.state = mix(seed ^ ((id + 1) * 0x9E3779B97F4A7C15ULL));
        return r;
    }

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double u01() { // in (0,1)
        return (next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }
};

/// Box-Muller, fully pinned-down (no library distribution variance).
struct GaussianRng {
    SplitMix64 rng;
    bool has_spare = false;
    double spare = 0.0;

    explicit GaussianRng(SplitMix64 r) : rng(r) {}

    double operator()() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        const double u = rng.u01();
        const double v = rng.u01();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double th = 2.0 * M_PI * v;
        spare = r * std::sin(th);
        has_spare = true;
        return r * std::cos(th);
    }
};

} // namespace nibm
