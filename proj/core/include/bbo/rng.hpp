#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace bbo {

/// 64-bit FNV-1a, used to fold strings into seed material.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// splitmix64 finalizer; decorrelates combined seed words.
inline std::uint64_t split_mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Order-sensitive combination of two seed words.
inline std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
    return split_mix64(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

inline std::uint64_t seed_mix(std::uint64_t a, std::string_view b) {
    return seed_mix(a, fnv1a64(b));
}

template <typename... Rest>
std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b, Rest... rest) {
    return seed_mix(seed_mix(a, b), rest...);
}

template <typename... Rest>
std::uint64_t seed_mix(std::uint64_t a, std::string_view b, Rest... rest) {
    return seed_mix(seed_mix(a, b), rest...);
}

/// Seeded random stream. Wraps std::mt19937_64 (whose output sequence is
/// pinned by the standard) and derives doubles by bit manipulation, so a
/// given seed produces the same draws on every platform. The std::*
/// distributions are deliberately not used: their mapping from engine
/// output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(split_mix64(seed)) {}

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    /// Uniform integer in [0, n). n must be >= 1.
    std::size_t uniform_below(std::size_t n) {
        auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    /// Standard normal via Marsaglia polar, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Seed for a dependent stream, advancing this one.
    std::uint64_t fork() { return split_mix64(engine_()); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace bbo
