#pragma once

// Exact arithmetic in a real quadratic extension Q(sqrt(D)): values a + b*sqrt(D)
// with a, b, D rational, D >= 0. Signs are decided exactly by squaring; values
// from different nontrivial extensions cannot be mixed (FieldTowerUnsupported).
// Perfect-square D collapses to the rationals automatically.

#include <string>
#include <utility>

#include "errors.hpp"
#include "rational.hpp"

namespace momcurve {

class Quad {
  public:
    Quad() : a_(0), b_(0), d_(0) {}
    // implicit by design: the scalar concept mixes Quad with int/Rat freely
    Quad(int v) : a_(v), b_(0), d_(0) {}        // NOLINT
    Quad(Rat v) : a_(std::move(v)), b_(0), d_(0) {}  // NOLINT
    Quad(Rat a, Rat b, Rat d) : a_(std::move(a)), b_(std::move(b)), d_(std::move(d)) {
        if (sgn(d_) < 0) throw PreconditionViolated("negative radicand in Quad");
        normalize();
    }

    /// sqrt(q) for q >= 0 as a Quad (exact collapse when q is a perfect square).
    static Quad sqrt(const Rat& q) { return Quad(Rat(0), Rat(1), q); }

    const Rat& rat_part() const { return a_; }
    const Rat& surd_part() const { return b_; }
    const Rat& radicand() const { return d_; }
    bool is_rational() const { return sgn(b_) == 0; }
    /// Exact rational value; throws unless is_rational().
    const Rat& to_rat() const {
        if (!is_rational()) throw PreconditionViolated("Quad value is irrational");
        return a_;
    }

    friend Quad operator+(const Quad& x, const Quad& y) {
        Rat d = merge(x, y);
        return Quad(x.a_ + y.a_, x.b_ + y.b_, d);
    }
    friend Quad operator-(const Quad& x, const Quad& y) {
        Rat d = merge(x, y);
        return Quad(x.a_ - y.a_, x.b_ - y.b_, d);
    }
    friend Quad operator*(const Quad& x, const Quad& y) {
        Rat d = merge(x, y);
        return Quad(x.a_ * y.a_ + x.b_ * y.b_ * d, x.a_ * y.b_ + x.b_ * y.a_, d);
    }
    friend Quad operator/(const Quad& x, const Quad& y) {
        Rat d = merge(x, y);
        Rat norm = y.a_ * y.a_ - y.b_ * y.b_ * d;  // (a+b√d)(a−b√d)
        if (sgn(norm) == 0) throw SingularMatrix("division by zero Quad");
        return Quad((x.a_ * y.a_ - x.b_ * y.b_ * d) / norm, (x.b_ * y.a_ - x.a_ * y.b_) / norm,
                    d);
    }
    friend bool operator==(const Quad& x, const Quad& y) {
        return x.a_ == y.a_ && x.b_ == y.b_ && (sgn(x.b_) == 0 || x.d_ == y.d_);
    }

    friend int sign(const Quad& x) {
        if (sgn(x.b_) == 0) return sgn(x.a_);
        if (sgn(x.a_) == 0) return sgn(x.b_);
        if (sgn(x.a_) == sgn(x.b_)) return sgn(x.a_);
        // opposite signs: compare a^2 against b^2 d
        int cmp = sgn(Rat(x.a_ * x.a_ - x.b_ * x.b_ * x.d_));
        if (cmp == 0) return 0;  // only possible if d were a square; kept for safety
        return cmp > 0 ? sgn(x.a_) : sgn(x.b_);
    }
    friend bool is_zero(const Quad& x) { return sign(x) == 0; }

    /// Rational bracket [lo, hi] around the value, width ~10^-digits.
    std::pair<Rat, Rat> bracket(int digits) const {
        if (sgn(b_) == 0) return {a_, a_};
        auto [slo, shi] = sqrt_bracket(d_, digits);
        if (sgn(b_) > 0) return {a_ + b_ * slo, a_ + b_ * shi};
        return {a_ + b_ * shi, a_ + b_ * slo};
    }

    std::string str() const {
        if (sgn(b_) == 0) return to_string(a_);
        return to_string(a_) + " + (" + to_string(b_) + ")*sqrt(" + to_string(d_) + ")";
    }

  private:
    void normalize() {
        if (sgn(b_) == 0) {
            d_ = 0;
            return;
        }
        if (auto r = sqrt_exact(d_)) {  // perfect square: collapse to Q
            a_ += b_ * *r;
            b_ = 0;
            d_ = 0;
        }
    }
    static Rat merge(const Quad& x, const Quad& y) {
        if (sgn(x.b_) == 0) return y.d_;
        if (sgn(y.b_) == 0) return x.d_;
        if (x.d_ != y.d_)
            throw FieldTowerUnsupported("mixing sqrt(" + to_string(x.d_) + ") with sqrt(" +
                                        to_string(y.d_) + ")");
        return x.d_;
    }

    Rat a_, b_, d_;
};

inline Rat abs_upper_bound(const Quad& x) {
    if (x.is_rational()) return abs_upper_bound(x.rat_part());
    auto [lo, hi] = x.bracket(3);
    return std::max(abs_upper_bound(lo), abs_upper_bound(hi));
}

inline Rat abs_lower_bound(const Quad& x) {
    if (x.is_rational()) return abs_lower_bound(x.rat_part());
    // |a + b√d| = |a^2 - b^2 d| / |a - b√d| >= |a^2 - b^2 d| / (|a| + |b| ub(√d))
    Rat num = x.rat_part() * x.rat_part() - x.surd_part() * x.surd_part() * x.radicand();
    if (sgn(num) < 0) num = -num;
    auto [slo, shi] = sqrt_bracket(x.radicand(), 3);
    Rat den = abs_upper_bound(x.rat_part()) + abs_upper_bound(x.surd_part()) * shi;
    return num / den;
}

}  // namespace momcurve
