#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace manybody {

/// splitmix64 finalizer; used to derive stream seeds so that (seed, tag...)
/// pairs give statistically independent engines.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = mix64(seed ^ 0x6a09e667f3bcc908ULL);
    s = mix64(s ^ a);
    s = mix64(s ^ b);
    return mix64(s ^ c);
}

/// Deterministic RNG. std::mt19937_64's bit stream is pinned by the standard;
/// the distributions here are hand-rolled because std::uniform_*_distribution
/// is implementation-defined and would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, bound) by rejection; bound > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double next_double() { return double(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe for log().
    double next_double_open() { return double((eng_() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller (one value per call; no cached spare, so
    /// the draw count stays easy to reason about when replaying).
    double normal() {
        const double u1 = next_double_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace manybody
