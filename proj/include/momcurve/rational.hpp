#pragma once

// Exact rational scalar for the whole library: GMP's mpq_class in lowest terms,
// plus the handful of number-theoretic helpers the solvers need (exact square
// roots, decimal rendering, Stern-Brocot simplest-rational selection).

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace momcurve {

using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
    Rat q(num, den);
    q.canonicalize();
    return q;
}

/// Parse "p/q", "p", or a plain decimal like "-0.25" into an exact rational.
inline Rat parse_rat(const std::string& s) {
    auto bad = [&] { throw std::invalid_argument("not a rational literal: '" + s + "'"); };
    if (s.empty()) bad();
    auto slash = s.find('/');
    auto dot = s.find('.');
    try {
        if (slash != std::string::npos) {
            Rat q(s, 10);
            if (q.get_den() == 0) bad();
            q.canonicalize();
            return q;
        }
        if (dot != std::string::npos) {
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            std::size_t frac_len = s.size() - dot - 1;
            Rat q(Int(digits, 10), Int(1));
            for (std::size_t k = 0; k < frac_len; ++k) q /= 10;
            q.canonicalize();
            return q;
        }
        Rat q(Int(s, 10), Int(1));
        return q;
    } catch (const std::invalid_argument&) {
        bad();
    }
    return Rat();  // unreachable
}

inline std::string to_string(const Rat& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline int sign(const Rat& q) { return sgn(q); }
inline bool is_zero(const Rat& q) { return sgn(q) == 0; }

inline Int floor_int(const Rat& q) {
    Int f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return f;
}
inline Int ceil_int(const Rat& q) {
    Int c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return c;
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
inline std::optional<Rat> sqrt_exact(const Rat& q) {
    if (sgn(q) < 0) return std::nullopt;
    if (sgn(q) == 0) return Rat(0);
    Int num = q.get_num(), den = q.get_den();
    if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
        return std::nullopt;
    Int rn, rd;
    mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
    Rat r(rn, rd);
    r.canonicalize();
    return r;
}

/// Rational bracket [lo, hi] around sqrt(q) with hi - lo <= 10^-digits (q >= 0).
inline std::pair<Rat, Rat> sqrt_bracket(const Rat& q, int digits) {
    if (sgn(q) < 0) throw std::domain_error("sqrt of negative rational");
    if (sgn(q) == 0) return {Rat(0), Rat(0)};
    Int scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    // floor(sqrt(q * scale^2)) / scale lower-bounds sqrt(q) within 1/scale.
    Rat scaled = q * Rat(scale) * Rat(scale);
    Int num = scaled.get_num(), den = scaled.get_den();
    Int t = num * den;  // sqrt(num/den) = sqrt(num*den)/den
    Int r;
    mpz_sqrt(r.get_mpz_t(), t.get_mpz_t());
    Rat lo(r, den * scale);
    lo.canonicalize();
    Rat hi = lo + Rat(1, 1) / Rat(scale);
    return {lo, hi};
}

/// Fixed-point decimal rendering with `digits` fractional digits (round toward zero).
inline std::string to_decimal(const Rat& q, int digits) {
    bool neg = sgn(q) < 0;
    Rat a = neg ? Rat(-q) : q;
    Int scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    Int scaled = floor_int(a * Rat(scale));
    Int ip = scaled / scale, fp = scaled % scale;
    std::string frac = fp.get_str();
    frac.insert(frac.begin(), static_cast<std::size_t>(digits) - frac.size(), '0');
    std::string out = ip.get_str();
    if (digits > 0) out += "." + frac;
    return (neg && (ip != 0 || fp != 0)) ? "-" + out : out;
}

/// Simplest rational strictly inside the open interval (lo, hi), lo < hi:
/// the element of minimal denominator (and then minimal |numerator|), found
/// by the continued-fraction / Stern-Brocot walk.
inline Rat simplest_rational_in(const Rat& lo, const Rat& hi) {
    if (!(lo < hi)) throw std::invalid_argument("empty open interval");
    if (sgn(lo) < 0 && sgn(hi) > 0) return Rat(0);
    if (sgn(hi) <= 0) return -simplest_rational_in(-hi, -lo);
    // now 0 <= lo < hi
    Int fl = floor_int(lo);
    if (Rat(fl + 1) < hi) return Rat(fl + 1);  // smallest integer strictly inside
    if (lo == Rat(fl)) {
        // (integer, hi) with hi <= fl+1: simplest is fl + 1/k, minimal such k
        Rat inv = 1 / (hi - lo);
        Int k = floor_int(inv) + 1;
        return Rat(fl) + Rat(1) / Rat(k);
    }
    // both endpoints in (fl, fl+1]: peel off the integer part and recurse
    Rat inner = simplest_rational_in(1 / (hi - Rat(fl)), 1 / (lo - Rat(fl)));
    return Rat(fl) + 1 / inner;
}

}  // namespace momcurve
