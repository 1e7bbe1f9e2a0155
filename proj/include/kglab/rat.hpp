#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kglab {

// 2^e as an exact integer.
inline mpz_class pow2(std::uint64_t e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
    return r;
}

// 2^-e as an exact rational.
inline mpq_class pow2_inv(std::uint64_t e) {
    mpq_class r(1, pow2(e));
    r.canonicalize();
    return r;
}

// Smallest k with 2^k >= x, for x >= 1.
inline std::uint64_t ceil_log2(const mpz_class& x) {
    if (x <= 0) throw std::invalid_argument("ceil_log2: nonpositive argument");
    if (x == 1) return 0;
    mpz_class t = x - 1;
    return mpz_sizeinbase(t.get_mpz_t(), 2);
}

inline mpz_class binomial(std::uint64_t n, std::uint64_t k) {
    mpz_class r;
    if (k > n) return r;  // 0
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

// Canonical "p/q" form; integers render without the "/1".
inline std::string rat_str(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline mpq_class parse_rat(const std::string& s) {
    mpq_class q;
    if (mpq_set_str(q.get_mpq_t(), s.c_str(), 10) != 0)
        throw std::invalid_argument("bad rational: " + s);
    q.canonicalize();
    return q;
}

}  // namespace kglab
