#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fedvs {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded RNG stream. The raw generator is std::mt19937_64; all
/// distribution transforms are inverse-CDF so that a given seed yields
/// the same sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Exponential with the given mean; mean <= 0 degenerates to 0.
    double exponential(double mean) {
        if (mean <= 0.0) return 0.0;
        return -mean * std::log1p(-unit());
    }

    /// Zero-mean Laplace with the given scale.
    double laplace(double scale) {
        double u = unit() - 0.5;
        double mag = -scale * std::log1p(-2.0 * std::abs(u));
        return u < 0.0 ? -mag : mag;
    }

    /// Uniform integer in [0, bound) by rejection from the masked draw.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = ~0ULL >> __builtin_clzll(bound - 1 | 1);
        for (;;) {
            std::uint64_t v = next_u64() & mask;
            if (v < bound) return v;
        }
    }

    /// Independent child stream; deterministic function of (seed, tag).
    Rng fork(std::uint64_t tag) const {
        return Rng(splitmix64(seed_ ^ splitmix64(tag + 0x51ed2701)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace fedvs
