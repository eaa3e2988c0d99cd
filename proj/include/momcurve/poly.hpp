#pragma once

// Univariate polynomials over an exact ordered-field scalar T: arithmetic,
// gcd / squarefree parts, Sturm chains, real-root isolation with exact
// rational-root detection (T = Rat), interval refinement, sign evaluation at
// isolated algebraic points, and resultants.

#include <algorithm>
#include <array>
#include <optional>
#include <type_traits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rational.hpp"

namespace momcurve {

template <class T>
class Poly {
  public:
    Poly() {}
    Poly(std::initializer_list<T> cs) : c_(cs) { normalize(); }
    explicit Poly(std::vector<T> cs) : c_(std::move(cs)) { normalize(); }
    explicit Poly(T constant) : c_{std::move(constant)} { normalize(); }

    static Poly monomial(int degree, T coeff = T(1)) {
        std::vector<T> cs(degree + 1, T(0));
        cs[degree] = std::move(coeff);
        return Poly(std::move(cs));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero poly
    bool is_zero() const { return c_.empty(); }
    const std::vector<T>& coeffs() const { return c_; }
    T coeff(int k) const { return k <= degree() ? c_[k] : T(0); }
    const T& lead() const { return c_.back(); }

    /// Horner evaluation; result lives in whichever of T, X contains the other.
    template <class X>
    auto eval(const X& x) const {
        using R = std::conditional_t<std::is_convertible_v<X, T>, T, X>;
        R xx(x);
        R acc(0);
        for (int k = degree(); k >= 0; --k) acc = R(acc * xx + R(c_[k]));
        return acc;
    }

    Poly derivative() const {
        if (degree() < 1) return Poly();
        std::vector<T> d(degree());
        for (int k = 1; k <= degree(); ++k) d[k - 1] = c_[k] * T(k);
        return Poly(std::move(d));
    }

    Poly operator-() const {
        std::vector<T> r = c_;
        for (auto& x : r) x = T(0) - x;
        return Poly(std::move(r));
    }
    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<T> r(std::max(a.c_.size(), b.c_.size()), T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] = r[i] + a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] = r[i] + b.c_[i];
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<T> r(a.c_.size() + b.c_.size() - 1, T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] = r[i + j] + a.c_[i] * b.c_[j];
        return Poly(std::move(r));
    }
    friend Poly operator*(const T& s, const Poly& p) { return Poly(std::vector<T>{s}) * p; }
    bool operator==(const Poly& o) const {
        if (c_.size() != o.c_.size()) return false;
        for (std::size_t i = 0; i < c_.size(); ++i)
            if (!(c_[i] == o.c_[i])) return false;
        return true;
    }

    /// Exact (quotient, remainder) with deg rem < deg divisor.
    friend std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
        if (b.is_zero()) throw ZeroPolynomial("division by zero polynomial");
        std::vector<T> rem = a.c_;
        std::vector<T> quo(std::max<int>(0, a.degree() - b.degree() + 1), T(0));
        T inv_lead = T(1) / b.lead();
        for (int k = a.degree(); k >= b.degree(); --k) {
            if ((int)rem.size() <= k) continue;
            T f = rem[k] * inv_lead;
            if (sign(f) == 0) continue;
            quo[k - b.degree()] = f;
            for (int j = 0; j <= b.degree(); ++j)
                rem[k - b.degree() + j] = rem[k - b.degree() + j] - f * b.c_[j];
        }
        if ((int)rem.size() > b.degree()) rem.resize((std::size_t)b.degree());
        return {Poly(std::move(quo)), Poly(std::move(rem))};
    }

    Poly monic() const {
        if (is_zero()) return *this;
        T inv = T(1) / lead();
        std::vector<T> r = c_;
        for (auto& x : r) x = x * inv;
        return Poly(std::move(r));
    }

  private:
    void normalize() {
        while (!c_.empty() && sign(c_.back()) == 0) c_.pop_back();
    }
    std::vector<T> c_;  // ascending degree
};

template <class T>
Poly<T> gcd(Poly<T> a, Poly<T> b) {
    while (!b.is_zero()) {
        Poly<T> r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

/// Extended gcd: returns (g, u, v) with u*a + v*b = g, g monic (or zero).
template <class T>
std::array<Poly<T>, 3> ext_gcd(Poly<T> a, Poly<T> b) {
    Poly<T> u0{T(1)}, v0, u1, v1{T(1)};
    while (!b.is_zero()) {
        auto [q, r] = divmod(a, b);
        a = std::move(b);
        b = std::move(r);
        Poly<T> u2 = u0 - q * u1, v2 = v0 - q * v1;
        u0 = std::move(u1);
        v0 = std::move(v1);
        u1 = std::move(u2);
        v1 = std::move(v2);
    }
    if (a.is_zero()) return {a, u0, v0};
    T inv = T(1) / a.lead();
    return {a.monic(), inv * u0, inv * v0};
}

template <class T>
Poly<T> squarefree_part(const Poly<T>& p) {
    if (p.degree() < 1) return p.monic();
    Poly<T> g = gcd(p, p.derivative());
    return divmod(p, g).first.monic();
}

// ---------------------------------------------------------------------------
// Sturm chains and root counting on intervals with rational endpoints.
// ---------------------------------------------------------------------------

template <class T>
std::vector<Poly<T>> sturm_chain(const Poly<T>& p) {
    std::vector<Poly<T>> chain{p, p.derivative()};
    while (!chain.back().is_zero() && chain.back().degree() >= 0) {
        const Poly<T>& a = chain[chain.size() - 2];
        const Poly<T>& b = chain.back();
        if (b.is_zero()) break;
        Poly<T> r = divmod(a, b).second;
        if (r.is_zero()) break;
        chain.push_back(-r);
    }
    return chain;
}

template <class T>
int sturm_variations(const std::vector<Poly<T>>& chain, const Rat& x) {
    int var = 0, prev = 0;
    for (const auto& q : chain) {
        int s = sign(q.eval(x));
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++var;
        prev = s;
    }
    return var;
}

/// Number of distinct real roots of p in (lo, hi]; requires p(lo), p(hi) != 0
/// for the textbook guarantee (we assert only p nonzero).
template <class T>
int count_roots(const std::vector<Poly<T>>& chain, const Rat& lo, const Rat& hi) {
    return sturm_variations(chain, lo) - sturm_variations(chain, hi);
}

// ---------------------------------------------------------------------------
// Scalar magnitude bounds (for Cauchy root bounds); specialized per scalar.
// ---------------------------------------------------------------------------

inline Rat abs_upper_bound(const Rat& q) { return q < 0 ? Rat(-q) : q; }
inline Rat abs_lower_bound(const Rat& q) { return q < 0 ? Rat(-q) : q; }

/// Cauchy bound: all real roots of p lie in [-B, B].
template <class T>
Rat root_bound(const Poly<T>& p) {
    if (p.is_zero()) throw ZeroPolynomial();
    Rat lead_lo = abs_lower_bound(p.lead());
    Rat m(0);
    for (int k = 0; k < p.degree(); ++k) m = std::max(m, abs_upper_bound(p.coeff(k)));
    return Rat(1) + m / lead_lo;
}

// ---------------------------------------------------------------------------
// Real-root isolation.
// ---------------------------------------------------------------------------

/// One isolated real root of the stored squarefree polynomial: exactly one
/// root in the open interval (lo, hi), both endpoints non-roots with a sign
/// change across the interval. `exact` is set when the root is rational.
template <class T>
struct RootBox {
    Poly<T> sf;  // squarefree polynomial owning the root
    Rat lo, hi;
    std::optional<Rat> exact;

    Rat mid() const { return exact ? *exact : Rat((lo + hi) / 2); }
    Rat width() const { return exact ? Rat(0) : Rat(hi - lo); }

    /// Bisect until hi - lo <= w (no-op for exact roots).
    void refine(const Rat& w) {
        if (exact) return;
        int slo = sign(sf.eval(lo));
        while (hi - lo > w) {
            Rat m = (lo + hi) / 2;
            int sm = sign(sf.eval(m));
            if (sm == 0) {
                // landed on the root: shrink symmetrically around it
                Rat r = m;
                Rat eps = (hi - lo) / 4;
                lo = r - eps;
                hi = r + eps;
                exact = r;
                return;
            }
            if (sm == slo)
                lo = m;
            else
                hi = m;
        }
    }
};

namespace detail {

/// For T = Rat: try to recognize the unique root in box as an exact rational.
inline void detect_rational_root(RootBox<Rat>& box) {
    if (box.exact) return;
    // integer version of the squarefree polynomial (scale by lcm of denominators)
    Int den(1);
    for (const Rat& c : box.sf.coeffs()) den = lcm(den, Int(c.get_den()));
    Rat lead_scaled = box.sf.lead() * Rat(den);
    Int lc = abs(lead_scaled.get_num());
    // a rational root p/q (lowest terms) of the primitive poly has q | lc;
    // once the box is narrower than 1/(2 lc^2), the root (if rational) is the
    // unique smallest-denominator rational inside. For huge lc that width is
    // unreachable, so cap the refinement: testing the candidate stays exact
    // (no false positives), only detection of large-denominator rational
    // roots is forgone and the box simply remains an isolating interval.
    Rat target;
    if (mpz_sizeinbase(lc.get_mpz_t(), 2) <= 128) {
        target = Rat(1) / (Rat(2) * Rat(lc) * Rat(lc));
    } else {
        target = Rat(1);
        for (int k = 0; k < 80; ++k) target /= 10;
    }
    box.refine(target);
    if (box.exact) return;
    Rat cand = simplest_rational_in(box.lo, box.hi);
    if (momcurve::is_zero(box.sf.eval(cand))) box.exact = cand;
}

template <class T>
void detect_rational_root(RootBox<T>&) {}  // only meaningful over Rat

/// Round each coefficient to ~10^-digits relative accuracy (against the
/// largest coefficient). Only for polynomials that are themselves candidates
/// whose use is re-verified downstream: huge-height exact coefficients make
/// Sturm isolation intractable, a nearby low-height polynomial does not.
inline Poly<Rat> round_poly(const Poly<Rat>& p, int digits) {
    if (p.is_zero()) return p;
    Rat scale(0);
    for (const Rat& c : p.coeffs()) scale = std::max(scale, Rat(abs(c)));
    Rat eps = scale;
    for (int k = 0; k < digits; ++k) eps /= 10;
    // snap to a common grid so the rounded coefficients share one denominator
    std::vector<Rat> out;
    for (const Rat& c : p.coeffs()) out.push_back(Rat(floor_int(c / eps + Rat(1, 2))) * eps);
    return Poly<Rat>(std::move(out));
}

/// Height of a rational in bits (numerator plus denominator).
inline std::size_t rat_bits(const Rat& c) {
    return mpz_sizeinbase(c.get_num().get_mpz_t(), 2) +
           mpz_sizeinbase(c.get_den().get_mpz_t(), 2);
}

/// Largest coefficient height in bits.
inline std::size_t coeff_bits(const Poly<Rat>& p) {
    std::size_t bits = 0;
    for (const Rat& c : p.coeffs()) bits = std::max(bits, rat_bits(c));
    return bits;
}

}  // namespace detail

/// Isolate all distinct real roots of p inside the open interval (lo, hi).
/// Returned boxes are disjoint, sorted, each holding exactly one root of the
/// squarefree part of p; rational roots are recognized exactly (T = Rat).
template <class T>
std::vector<RootBox<T>> isolate_real_roots(const Poly<T>& p, Rat lo, Rat hi) {
    if (p.is_zero()) throw ZeroPolynomial();
    Poly<T> sf = squarefree_part(p);
    // endpoints that are themselves (necessarily rational) roots are not in
    // the open interval: deflate them away so Sturm endpoints are non-roots
    while (sf.degree() >= 1 && sign(sf.eval(lo)) == 0)
        sf = divmod(sf, Poly<T>{T(0) - T(lo), T(1)}).first;
    while (sf.degree() >= 1 && sign(sf.eval(hi)) == 0)
        sf = divmod(sf, Poly<T>{T(0) - T(hi), T(1)}).first;
    if (sf.degree() < 1) return {};
    auto chain = sturm_chain(sf);
    std::vector<RootBox<T>> out;
    struct Seg {
        Rat lo, hi;
        int cnt;
    };
    std::vector<Seg> stack{{lo, hi, count_roots(chain, lo, hi)}};
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        if (s.cnt == 0) continue;
        if (s.cnt == 1) {
            RootBox<T> box{sf, s.lo, s.hi, std::nullopt};
            detail::detect_rational_root(box);
            out.push_back(std::move(box));
            continue;
        }
        Rat m = (s.lo + s.hi) / 2;
        while (sign(sf.eval(m)) == 0) m = m + (s.hi - s.lo) / 1000003;
        int left = count_roots(chain, s.lo, m);
        stack.push_back({m, s.hi, s.cnt - left});
        stack.push_back({s.lo, m, left});
    }
    std::sort(out.begin(), out.end(),
              [](const RootBox<T>& a, const RootBox<T>& b) { return a.lo < b.lo; });
    return out;
}

/// Isolate over the full Cauchy bound interval.
template <class T>
std::vector<RootBox<T>> isolate_real_roots(const Poly<T>& p) {
    Rat b = root_bound(squarefree_part(p));
    return isolate_real_roots(p, -b, b);
}

/// Exact sign of q at the algebraic point isolated by `box` (a root of
/// box.sf). Returns 0 iff q vanishes there; decided by shared-root gcd tests
/// plus interval refinement.
template <class T>
int sign_at(const Poly<T>& q, RootBox<T> box) {
    if (q.is_zero()) return 0;
    if (box.exact) return sign(q.eval(*box.exact));
    Poly<T> g = gcd(q, box.sf);
    if (g.degree() >= 1) {
        auto chain = sturm_chain(g);
        if (count_roots(chain, box.lo, box.hi) > 0) return 0;  // q shares the root
    }
    // q has finitely many roots; refine until none lie inside the box, then
    // the sign at the (non-root) endpoints is the sign at the point.
    auto qchain = sturm_chain(squarefree_part(q));
    for (;;) {
        int slo = sign(q.eval(box.lo)), shi = sign(q.eval(box.hi));
        if (slo != 0 && slo == shi && count_roots(qchain, box.lo, box.hi) == 0) return slo;
        box.refine((box.hi - box.lo) / 4);
        if (box.exact) return sign(q.eval(*box.exact));
    }
}

// ---------------------------------------------------------------------------
// Resultants (Sylvester determinant) and Lagrange interpolation.
// ---------------------------------------------------------------------------

template <class T>
T resultant(const Poly<T>& p, const Poly<T>& q) {
    if (p.is_zero() || q.is_zero()) return T(0);
    const int m = p.degree(), n = q.degree();
    if (m == 0) {
        T r(1);
        for (int i = 0; i < n; ++i) r = r * p.lead();
        return r;
    }
    if (n == 0) {
        T r(1);
        for (int i = 0; i < m; ++i) r = r * q.lead();
        return r;
    }
    Mat<T> syl(m + n, m + n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k <= m; ++k) syl(i, i + (m - k)) = p.coeff(k);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k <= n; ++k) syl(n + i, i + (n - k)) = q.coeff(k);
    return determinant(syl);
}

/// Unique polynomial of degree < points.size() through the given points.
template <class T>
Poly<T> interpolate(const std::vector<std::pair<T, T>>& points) {
    Poly<T> acc;
    for (std::size_t i = 0; i < points.size(); ++i) {
        Poly<T> term{points[i].second};
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            T denom = points[i].first - points[j].first;
            term = term * Poly<T>{T(0) - points[j].first / denom, T(1) / denom};
        }
        acc = acc + term;
    }
    return acc;
}

}  // namespace momcurve
