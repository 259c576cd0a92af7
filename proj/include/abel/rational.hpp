#pragma once

#include <gmpxx.h>

#include <string>

#include "abel/errors.hpp"

namespace abel {

using Rat = mpq_class;
using Int = mpz_class;

// gmpxx lacks long long constructors; this platform's long is 64-bit.
inline Int make_int(long long v) { return Int(static_cast<long>(v)); }
inline Rat make_rat(long long v) { return Rat(static_cast<long>(v)); }
inline Rat make_rat(long long num, long long den) {
    Rat r(static_cast<long>(num), static_cast<long>(den));
    r.canonicalize();
    return r;
}

// Reduce q into [0, 1).
inline Rat frac(const Rat& q) {
    Int fl;
    mpz_fdiv_q(fl.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    Rat r = q - Rat(fl);
    r.canonicalize();
    return r;
}

// Nearest integer, ties toward +infinity.  Exact.
inline Int round_nearest(const Rat& q) {
    Rat shifted = q + Rat(1, 2);
    Int fl;
    mpz_fdiv_q(fl.get_mpz_t(), shifted.get_num().get_mpz_t(), shifted.get_den().get_mpz_t());
    return fl;
}

// Distance from q to the nearest integer, in [0, 1/2].
inline Rat circle_dist(const Rat& q) {
    Rat f = frac(q);
    Rat other = 1 - f;
    return f <= other ? f : other;
}

inline bool is_dyadic(const Rat& q) {
    Int den = q.get_den();
    // den is positive and canonical; a power of two has a single set bit.
    return mpz_popcount(den.get_mpz_t()) == 1;
}

// Round q to the nearest multiple of 2^-t (ties toward +infinity).
inline Rat dyadic_round(const Rat& q, unsigned long t) {
    Rat scaled = q;
    mpq_mul_2exp(scaled.get_mpq_t(), scaled.get_mpq_t(), t);
    Rat r(round_nearest(scaled));
    mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), t);
    return r;
}

inline Rat pow2(long e) {
    Rat r(1);
    if (e >= 0)
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(e));
    else
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(-e));
    return r;
}

// Parse "p/q" or "p" with optional sign.  Throws validation_error on junk.
inline Rat parse_rational(const std::string& text) {
    if (text.empty()) throw validation_error("empty rational literal");
    Rat r;
    if (mpq_set_str(r.get_mpq_t(), text.c_str(), 10) != 0)
        throw validation_error("bad rational literal: '" + text + "'");
    if (r.get_den() == 0) throw validation_error("zero denominator in '" + text + "'");
    r.canonicalize();
    return r;
}

inline std::string rational_str(const Rat& q) { return q.get_str(); }

} // namespace abel
