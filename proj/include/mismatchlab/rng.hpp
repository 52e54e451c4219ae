#pragma once
// Deterministic randomness. All stochastic routines take an explicit 64-bit
// seed; per-trial engines are derived with splitmix64 so results do not
// depend on how trials are sharded across threads. Sampling helpers are
// hand-rolled because std::uniform_int_distribution is not bit-reproducible
// across standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace mismatchlab {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream seed for sub-task `index` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x51ed270b8a1c6d3bULL));
}

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

// Unbiased draw from {0, ..., n-1} by rejection.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    if ((n & (n - 1)) == 0) return eng() & (n - 1);
    const std::uint64_t limit = n * (~std::uint64_t{0} / n);
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return x % n;
}

// Uniform double strictly inside (0, 1); 53 random bits centered in the bin.
inline double uniform_double(Engine& eng) {
    return (double((eng() >> 11)) + 0.5) * 0x1p-53;
}

// Rounds until first success for success probability p in (0, 1]. Inverse
// CDF of the geometric law; p == 1 short-circuits to 1 so log(0) never occurs.
inline std::uint64_t geometric(Engine& eng, double p) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("geometric: p must be in (0, 1]");
    if (p == 1.0) return 1;
    const double u = uniform_double(eng);
    const double r = std::log(u) / std::log1p(-p);
    if (r <= 1.0) return 1;
    return static_cast<std::uint64_t>(std::ceil(r));
}

}  // namespace mismatchlab
