#pragma once

// Exact arithmetic in Q(alpha) for a real algebraic number alpha given by a
// squarefree rational polynomial (not necessarily irreducible) together with
// an isolating interval. Zero tests go through gcd-with-modulus plus Sturm
// counting, signs through interval refinement, and inverses through the
// extended euclidean algorithm; when a gcd exposes a proper factor the shared
// modulus shrinks to whichever factor still vanishes at alpha, so no
// factorization is ever needed.

#include <memory>
#include <string>
#include <utility>

#include "errors.hpp"
#include "poly.hpp"
#include "rational.hpp"

namespace momcurve {

/// Shared, self-refining description of alpha. Invariants: modulus is monic
/// squarefree with exactly one root in the open interval (lo, hi), endpoints
/// are non-roots with a sign change, unless `exact` reveals alpha rational.
struct NumberField {
    Poly<Rat> modulus;
    Rat lo, hi;
    std::optional<Rat> exact;

    NumberField(Poly<Rat> m, Rat l, Rat h) : modulus(m.monic()), lo(std::move(l)), hi(std::move(h)) {
        if (modulus.degree() < 1) throw PreconditionViolated("number field modulus is constant");
        if (sign(modulus.eval(lo)) == 0 || sign(modulus.eval(hi)) == 0 ||
            sign(modulus.eval(lo)) == sign(modulus.eval(hi)))
            throw PreconditionViolated("isolating interval lacks a sign change");
    }

    /// One bisection step on the isolating interval.
    void refine() {
        if (exact) return;
        Rat m = (lo + hi) / 2;
        int sm = sign(modulus.eval(m));
        if (sm == 0) {
            exact = m;
            return;
        }
        if (sm == sign(modulus.eval(lo)))
            lo = m;
        else
            hi = m;
    }

    void refine_to(const Rat& width) {
        while (!exact && hi - lo > width) refine();
    }

    /// Replace the modulus by a monic divisor g that still has alpha as a
    /// root (caller must have certified g(alpha) = 0 via Sturm on (lo, hi)).
    void shrink_to(Poly<Rat> g) {
        g = g.monic();
        if (g.degree() < 1) throw PreconditionViolated("cannot shrink modulus to a constant");
        // restore the sign-change invariant for the new modulus
        while (!exact && (sign(g.eval(lo)) == 0 || sign(g.eval(hi)) == 0 ||
                          sign(g.eval(lo)) == sign(g.eval(hi)))) {
            refine();
            if (g.degree() == 1) break;
        }
        if (g.degree() == 1) exact = -g.coeff(0);  // monic x + c
        modulus = std::move(g);
    }
};

using FieldPtr = std::shared_ptr<NumberField>;

inline FieldPtr make_field(Poly<Rat> modulus, Rat lo, Rat hi) {
    return std::make_shared<NumberField>(std::move(modulus), std::move(lo), std::move(hi));
}

class NumberFieldScalar {
  public:
    NumberFieldScalar() {}
    NumberFieldScalar(int v) : rep_{Rat(v)} {}       // NOLINT: implicit scalar mixing
    NumberFieldScalar(Rat v) : rep_{std::move(v)} {}  // NOLINT
    NumberFieldScalar(FieldPtr fld, Poly<Rat> rep) : fld_(std::move(fld)), rep_(std::move(rep)) {
        reduce();
    }

    /// The generator alpha itself.
    static NumberFieldScalar alpha(FieldPtr fld) {
        return NumberFieldScalar(std::move(fld), Poly<Rat>{Rat(0), Rat(1)});
    }

    const Poly<Rat>& rep() const { return rep_; }
    const FieldPtr& field() const { return fld_; }
    bool is_rational() const { return !fld_ || rep_.degree() <= 0 || fld_->exact.has_value(); }
    Rat to_rat() const {
        if (fld_ && fld_->exact) return rep_.eval(*fld_->exact);
        if (fld_ && rep_.degree() > 0) throw PreconditionViolated("value not known rational");
        return rep_.is_zero() ? Rat(0) : rep_.coeff(0);
    }

    friend NumberFieldScalar operator+(const NumberFieldScalar& x, const NumberFieldScalar& y) {
        return NumberFieldScalar(merge(x, y), x.rep_ + y.rep_);
    }
    friend NumberFieldScalar operator-(const NumberFieldScalar& x, const NumberFieldScalar& y) {
        return NumberFieldScalar(merge(x, y), x.rep_ - y.rep_);
    }
    friend NumberFieldScalar operator*(const NumberFieldScalar& x, const NumberFieldScalar& y) {
        return NumberFieldScalar(merge(x, y), x.rep_ * y.rep_);
    }
    friend NumberFieldScalar operator/(const NumberFieldScalar& x, const NumberFieldScalar& y) {
        return x * y.inverse();
    }
    friend bool operator==(const NumberFieldScalar& x, const NumberFieldScalar& y) {
        return sign(x - y) == 0;
    }

    NumberFieldScalar inverse() const {
        if (!fld_ || rep_.degree() <= 0) {
            if (rep_.is_zero() || sign(rep_.coeff(0)) == 0)
                throw SingularMatrix("division by zero number-field scalar");
            return NumberFieldScalar(fld_, Poly<Rat>{Rat(1) / rep_.coeff(0)});
        }
        if (fld_->exact) {
            Rat v = rep_.eval(*fld_->exact);
            if (sign(v) == 0) throw SingularMatrix("division by zero number-field scalar");
            return NumberFieldScalar(Rat(1) / v);
        }
        Poly<Rat> d = rep_;
        for (;;) {
            Poly<Rat> g = gcd(d, fld_->modulus);
            if (g.degree() == 0) {
                auto [gg, u, v] = ext_gcd(d, fld_->modulus);
                (void)gg;
                (void)v;
                return NumberFieldScalar(fld_, u);
            }
            if (vanishes_at_alpha(g))
                throw SingularMatrix("division by zero number-field scalar");
            fld_->shrink_to(divmod(fld_->modulus, g).first);
            if (fld_->exact) return inverse();
        }
    }

    friend int sign(const NumberFieldScalar& x) {
        if (!x.fld_ || x.rep_.degree() <= 0)
            return x.rep_.is_zero() ? 0 : momcurve::sign(x.rep_.coeff(0));
        if (x.fld_->exact) return momcurve::sign(x.rep_.eval(*x.fld_->exact));
        // cheap path first: interval separation decides every nonzero value
        // after finitely many refinements, avoiding any Sturm-chain work
        for (int t = 0; t < 48; ++t) {
            auto [ilo, ihi] = x.interval_eval(x.fld_->lo, x.fld_->hi);
            if (sgn(ilo) > 0) return 1;
            if (sgn(ihi) < 0) return -1;
            x.fld_->refine();
            if (x.fld_->exact) return momcurve::sign(x.rep_.eval(*x.fld_->exact));
        }
        Poly<Rat> g = gcd(x.rep_, x.fld_->modulus);
        if (g.degree() >= 1 && x.vanishes_at_alpha(g)) return 0;
        auto qchain = sturm_chain(squarefree_part(x.rep_));
        for (;;) {
            int slo = momcurve::sign(x.rep_.eval(x.fld_->lo));
            int shi = momcurve::sign(x.rep_.eval(x.fld_->hi));
            if (slo != 0 && slo == shi &&
                count_roots(qchain, x.fld_->lo, x.fld_->hi) == 0)
                return slo;
            x.fld_->refine();
            if (x.fld_->exact) return momcurve::sign(x.rep_.eval(*x.fld_->exact));
        }
    }
    friend bool is_zero(const NumberFieldScalar& x) { return sign(x) == 0; }

    /// Rational bracket [lo, hi] around the value with hi - lo <= 10^-digits.
    std::pair<Rat, Rat> bracket(int digits) const {
        Rat target = Rat(1);
        for (int k = 0; k < digits; ++k) target /= 10;
        if (!fld_ || rep_.degree() <= 0 || fld_->exact) {
            Rat v = fld_ && fld_->exact ? rep_.eval(*fld_->exact)
                                        : (rep_.is_zero() ? Rat(0) : rep_.coeff(0));
            return {v, v};
        }
        for (;;) {
            auto [lo, hi] = interval_eval(fld_->lo, fld_->hi);
            if (hi - lo <= target) return {lo, hi};
            fld_->refine();
            if (fld_->exact) {
                Rat v = rep_.eval(*fld_->exact);
                return {v, v};
            }
        }
    }

    std::string str() const {
        if (is_rational()) return to_string(to_rat());
        std::string s;
        for (int k = 0; k <= rep_.degree(); ++k) {
            if (momcurve::is_zero(rep_.coeff(k))) continue;
            if (!s.empty()) s += " + ";
            s += "(" + to_string(rep_.coeff(k)) + ")*a^" + std::to_string(k);
        }
        return s.empty() ? "0" : s;
    }

  private:
    void reduce() {
        if (fld_ && rep_.degree() >= fld_->modulus.degree())
            rep_ = divmod(rep_, fld_->modulus).second;
        if (!fld_ || rep_.degree() <= 0) fld_.reset();
    }

    /// Whether a monic divisor g of the modulus has alpha as a root: every
    /// root of g inside (lo, hi) is a root of the modulus there, i.e. alpha.
    bool vanishes_at_alpha(const Poly<Rat>& g) const {
        auto chain = sturm_chain(g);
        return count_roots(chain, fld_->lo, fld_->hi) > 0;
    }

    static FieldPtr merge(const NumberFieldScalar& x, const NumberFieldScalar& y) {
        if (!x.fld_) return y.fld_;
        if (!y.fld_) return x.fld_;
        if (x.fld_ != y.fld_)
            throw FieldTowerUnsupported("mixing scalars from different number fields");
        return x.fld_;
    }

    /// Crude interval Horner evaluation of rep over [lo, hi].
    std::pair<Rat, Rat> interval_eval(const Rat& lo, const Rat& hi) const {
        Rat alo(0), ahi(0);
        for (int k = rep_.degree(); k >= 0; --k) {
            Rat c1 = alo * lo, c2 = alo * hi, c3 = ahi * lo, c4 = ahi * hi;
            Rat nlo = std::min(std::min(c1, c2), std::min(c3, c4));
            Rat nhi = std::max(std::max(c1, c2), std::max(c3, c4));
            alo = nlo + rep_.coeff(k);
            ahi = nhi + rep_.coeff(k);
        }
        return {alo, ahi};
    }

    FieldPtr fld_;    // null for plain rationals
    Poly<Rat> rep_;   // value = rep(alpha), deg < deg modulus when fld_ set
};

using NFS = NumberFieldScalar;

inline Rat abs_upper_bound(const NFS& x) {
    auto [lo, hi] = x.bracket(2);
    return std::max(abs_upper_bound(lo), abs_upper_bound(hi));
}

inline Rat abs_lower_bound(const NFS& x) {
    if (sign(x) == 0) return Rat(0);
    for (int digits = 2;; digits += 4) {
        auto [lo, hi] = x.bracket(digits);
        if (sgn(lo) > 0) return lo;
        if (sgn(hi) < 0) return -hi;
    }
}

}  // namespace momcurve
