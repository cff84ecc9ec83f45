#pragma once

#include <cstdint>

namespace psb {

// Deterministic cross-platform RNG; std::mt19937_64 is portable but the
// standard distributions are not, so sampling helpers live here.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        // splitmix64
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        Rng r(a * 0x2545f4914f6cdd1dULL + b);
        return r.next();
    }
};

} // namespace psb
