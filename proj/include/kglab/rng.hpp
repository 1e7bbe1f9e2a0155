#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>

namespace kglab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from (seed, index); used to key Monte
// Carlo trials so that parallel and serial execution agree.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index + 0x632be59bd9b4e019ULL));
}

// Exactly uniform integer in [0, n), n >= 1, by drawing bit blocks and
// rejecting overshoots. Deterministic in the engine state.
inline mpz_class uniform_below(const mpz_class& n, std::mt19937_64& rng) {
    if (n <= 0) throw std::invalid_argument("uniform_below: n must be positive");
    if (n == 1) return 0;
    const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    for (;;) {
        mpz_class r = 0;
        std::size_t got = 0;
        while (got < bits) {
            std::size_t take = std::min<std::size_t>(64, bits - got);
            std::uint64_t w = rng();
            if (take < 64) w >>= (64 - take);
            r <<= take;
            r += w;
            got += take;
        }
        if (r < n) return r;
    }
}

inline std::uint64_t uniform_u64_below(std::uint64_t n, std::mt19937_64& rng) {
    // std::uniform_int_distribution is not portable across libraries; this is.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    for (;;) {
        std::uint64_t w = rng();
        if (w < limit || limit == 0) return w % n;
    }
}

}  // namespace kglab
