#pragma once

// Real-root isolation for polynomials whose coefficients live in a number
// field, organized so that no gcd or Sturm chain is ever run over the
// extension (remainder sequences there suffer catastrophic coefficient
// blowup). Multiple roots are split off through principal subresultants,
// evaluated at rational values of the field generator and interpolated, so
// every determinant is computed over Q; the remaining simple roots are pinned
// down by recursing on the derivative and certifying root-free critical boxes
// with interval arithmetic. Sign evaluations at rational points only ever see
// the (small) input coefficient representatives, which stay cheap.

#include <algorithm>
#include <utility>
#include <vector>

#include "matrix.hpp"
#include "numberfield.hpp"
#include "poly.hpp"
#include "rational.hpp"

namespace momcurve {

std::vector<RootBox<NFS>> isolate_real_roots_nf(const Poly<NFS>& p);

namespace nfdetail {

/// The shared field of the coefficients, or null when all are rational.
inline FieldPtr field_of(const Poly<NFS>& p) {
    for (int k = 0; k <= p.degree(); ++k) {
        const FieldPtr& f = p.coeff(k).field();
        if (f && !f->exact) return f;
    }
    return nullptr;
}

/// Representative polynomial of a coefficient in the generator (constant for
/// rational values, including fields whose generator turned out rational).
inline Poly<Rat> rep_of(const NFS& c) {
    if (c.is_rational()) return Poly<Rat>{c.to_rat()};
    return c.rep();
}

inline int rep_degree(const Poly<NFS>& p) {
    int d = 0;
    for (int k = 0; k <= p.degree(); ++k) d = std::max(d, rep_of(p.coeff(k)).degree());
    return d;
}

/// Fixed-length coefficient row of p with the generator specialized to b.
inline std::vector<Rat> coeff_row(const Poly<NFS>& p, const Rat& b) {
    std::vector<Rat> c((std::size_t)p.degree() + 1, Rat(0));
    for (int k = 0; k <= p.degree(); ++k) c[(std::size_t)k] = rep_of(p.coeff(k)).eval(b);
    return c;
}

/// Coefficients (ascending, length j+1) of the j-th subresultant of the
/// polynomials given by fixed-length coefficient rows pc (formal degree m)
/// and qc (formal degree n), m >= n > j, via the determinant-polynomial
/// formula. Using determinants (rather than a remainder sequence) makes the
/// result a polynomial function of the entries, so specializing the generator
/// commutes with the computation at every sample point.
inline std::vector<Rat> subres_row(const std::vector<Rat>& pc, const std::vector<Rat>& qc,
                                   int j) {
    const int m = (int)pc.size() - 1, n = (int)qc.size() - 1;
    const int rows = m + n - 2 * j;
    auto entry = [&](int r, int col) -> Rat {
        const int deg = m + n - 1 - j - col;  // column col holds this degree
        if (r < n - j) {
            const int k = deg - (n - 1 - j - r);  // row r is A^{n-1-j-r} * p
            return (k >= 0 && k <= m) ? pc[(std::size_t)k] : Rat(0);
        }
        const int k = deg - (m - 1 - j - (r - (n - j)));  // A^s * q rows
        return (k >= 0 && k <= n) ? qc[(std::size_t)k] : Rat(0);
    };
    std::vector<Rat> out((std::size_t)j + 1, Rat(0));
    for (int l = 0; l <= j; ++l) {
        Mat<Rat> sq(rows, rows);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c + 1 < rows; ++c) sq(r, c) = entry(r, c);
            sq(r, rows - 1) = entry(r, m + n - 1 - j - l);
        }
        out[(std::size_t)l] = determinant(sq);
    }
    return out;
}

struct NfGcd {
    int deg = 0;
    Poly<NFS> g{NFS(1)};  // a nonzero scalar multiple of the gcd when deg >= 1
};

/// Gcd of two nonconstant polynomials over the field. The gcd degree is the
/// least j whose principal subresultant coefficient is nonzero at the
/// generator; each coefficient is sampled at rational generator values,
/// interpolated, and reduced modulo the field modulus.
inline NfGcd nf_gcd(Poly<NFS> p, Poly<NFS> q) {
    if (p.degree() < q.degree()) std::swap(p, q);
    const int m = p.degree(), n = q.degree();
    if (n < 1) return {};
    FieldPtr fld = field_of(p);
    if (!fld) fld = field_of(q);
    if (!fld) {  // everything rational: plain euclidean gcd over Q
        std::vector<Rat> pc = coeff_row(p, Rat(0)), qc = coeff_row(q, Rat(0));
        Poly<Rat> g = gcd(Poly<Rat>(std::move(pc)), Poly<Rat>(std::move(qc)));
        if (g.degree() < 1) return {};
        std::vector<NFS> cs;
        for (const Rat& x : g.coeffs()) cs.push_back(NFS(x));
        return {g.degree(), Poly<NFS>(std::move(cs))};
    }
    const int db = std::max(1, std::max(rep_degree(p), rep_degree(q)));
    std::vector<std::vector<Rat>> pr, qr;  // cached coefficient rows per sample
    auto rows_to = [&](int s) {
        while ((int)pr.size() < s) {
            Rat bk((int)pr.size());
            pr.push_back(coeff_row(p, bk));
            qr.push_back(coeff_row(q, bk));
        }
    };
    for (int j = 0; j < n; ++j) {
        const int need = db * (m + n - 2 * j) + 1;
        rows_to(need);
        std::vector<std::vector<Rat>> vals((std::size_t)need);
        for (int k = 0; k < need; ++k) vals[(std::size_t)k] = subres_row(pr[(std::size_t)k], qr[(std::size_t)k], j);
        auto coeff_at_alpha = [&](int l) {
            std::vector<std::pair<Rat, Rat>> pts;
            for (int k = 0; k < need; ++k) pts.push_back({Rat(k), vals[(std::size_t)k][(std::size_t)l]});
            return NFS(fld, interpolate(pts));
        };
        NFS lead = coeff_at_alpha(j);
        if (sign(lead) != 0) {
            if (j == 0) return {};
            std::vector<NFS> cs((std::size_t)j + 1);
            for (int l = 0; l < j; ++l) cs[(std::size_t)l] = coeff_at_alpha(l);
            cs[(std::size_t)j] = lead;
            return {j, Poly<NFS>(std::move(cs))};
        }
    }
    return {n, q};  // every lower subresultant vanished: q divides p
}

/// Rational interval enclosures of the coefficients (refines the field).
inline std::vector<std::pair<Rat, Rat>> enclose(const Poly<NFS>& p, int digits) {
    std::vector<std::pair<Rat, Rat>> out((std::size_t)p.degree() + 1);
    for (int k = 0; k <= p.degree(); ++k) out[(std::size_t)k] = p.coeff(k).bracket(digits);
    return out;
}

/// Interval Horner evaluation over the box [lo, hi].
inline std::pair<Rat, Rat> ieval(const std::vector<std::pair<Rat, Rat>>& c, const Rat& lo,
                                 const Rat& hi) {
    Rat alo(0), ahi(0);
    for (int k = (int)c.size() - 1; k >= 0; --k) {
        Rat c1 = alo * lo, c2 = alo * hi, c3 = ahi * lo, c4 = ahi * hi;
        Rat nlo = std::min(std::min(c1, c2), std::min(c3, c4));
        Rat nhi = std::max(std::max(c1, c2), std::max(c3, c4));
        alo = nlo + c[(std::size_t)k].first;
        ahi = nhi + c[(std::size_t)k].second;
    }
    return {alo, ahi};
}

/// Halve the isolating interval (mirrors the solver-side helper).
inline void shrink(RootBox<NFS>& b) {
    if (b.exact) {
        Rat w = (b.hi - b.lo) / 4;
        b.lo = *b.exact - w;
        b.hi = *b.exact + w;
    } else {
        b.refine((b.hi - b.lo) / 2);
    }
}

/// Refine box until it lies strictly inside exactly one of the (pairwise
/// separated) candidate boxes; its root is interior to one of them.
inline int locate(RootBox<NFS>& box, std::vector<RootBox<NFS>>& among) {
    for (;;) {
        int hit = -1;
        bool multi = false;
        for (std::size_t i = 0; i < among.size(); ++i) {
            if (box.hi < among[i].lo || among[i].hi < box.lo) continue;
            if (hit >= 0) multi = true;
            hit = (int)i;
        }
        if (!multi && hit >= 0 && among[(std::size_t)hit].lo < box.lo &&
            box.hi < among[(std::size_t)hit].hi)
            return hit;
        shrink(box);
    }
}

}  // namespace nfdetail

/// Isolate all distinct real roots of p. Returned boxes are sorted and
/// pairwise separated (hi < next lo), each carrying a polynomial with a sign
/// change across the box and exactly one root inside.
inline std::vector<RootBox<NFS>> isolate_real_roots_nf(const Poly<NFS>& p) {
    if (p.is_zero()) throw ZeroPolynomial();
    if (p.degree() < 1) return {};
    FieldPtr fld = nfdetail::field_of(p);
    if (!fld) {  // all coefficients rational: generic Sturm machinery over Q
        auto rboxes = isolate_real_roots(Poly<Rat>(nfdetail::coeff_row(p, Rat(0))));
        std::vector<RootBox<NFS>> out;
        for (auto& b : rboxes) {
            std::vector<NFS> sc;
            for (const Rat& x : b.sf.coeffs()) sc.push_back(NFS(x));
            out.push_back(RootBox<NFS>{Poly<NFS>(std::move(sc)), b.lo, b.hi, b.exact});
        }
        return out;
    }
    // critical points: every multiple root of p is among them, and between
    // consecutive ones p is strictly monotone
    const Poly<NFS> dp = p.derivative();
    std::vector<RootBox<NFS>> crit =
        dp.degree() >= 1 ? isolate_real_roots_nf(dp) : std::vector<RootBox<NFS>>{};

    // certify that p has no root inside a (closed) critical box; fails to
    // terminate exactly when the critical point is a multiple root of p
    auto certify_no_root = [&](RootBox<NFS>& b, int rounds) -> bool {
        int digits = 12;
        for (int t = 0; t < rounds; ++t) {
            auto enc = nfdetail::enclose(p, digits);
            auto [vlo, vhi] = nfdetail::ieval(enc, b.lo, b.hi);
            if (sgn(vlo) > 0 || sgn(vhi) < 0) return true;
            nfdetail::shrink(b);
            if ((t & 3) == 3) digits += 12;
        }
        return false;
    };

    // bounded passes first; a stall triggers the (sampled) multiplicity probe
    std::vector<char> clear(crit.size(), 0);
    std::vector<int> matched(crit.size(), -1);  // index into mroots
    std::vector<RootBox<NFS>> mroots;
    for (std::size_t i = 0; i < crit.size(); ++i) clear[i] = certify_no_root(crit[i], 32);
    if (std::find(clear.begin(), clear.end(), (char)0) != clear.end()) {
        nfdetail::NfGcd g = nfdetail::nf_gcd(p, dp);
        if (g.deg >= 1) {
            mroots = isolate_real_roots_nf(g.g);
            for (std::size_t r = 0; r < mroots.size(); ++r)
                matched[(std::size_t)nfdetail::locate(mroots[r], crit)] = (int)r;
        }
        for (std::size_t i = 0; i < crit.size(); ++i)
            while (!clear[i] && matched[i] < 0) clear[i] = certify_no_root(crit[i], 32);
    }

    // between consecutive critical boxes p is monotone and provably root-free
    // inside the boxes themselves (multiple roots were carved out above), so
    // endpoint signs over each gap decide everything
    Rat bound = root_bound(p);
    Rat left = -bound - 1, right = bound + 1;
    if (!crit.empty()) {
        left = std::min(left, Rat(crit.front().lo - 1));
        right = std::max(right, Rat(crit.back().hi + 1));
    }
    std::vector<RootBox<NFS>> out;
    const std::size_t gaps = crit.size() + 1;
    for (std::size_t i = 0; i < gaps; ++i) {
        Rat a = i == 0 ? left : Rat(crit[i - 1].hi);
        Rat b = i + 1 == gaps ? right : Rat(crit[i].lo);
        int sa = sign(p.eval(a)), sb = sign(p.eval(b));
        if (sa == 0)
            out.push_back(RootBox<NFS>{p, a - (b - a) / 4, a + (b - a) / 4, a});
        else if (sb == 0)
            out.push_back(RootBox<NFS>{p, b - (b - a) / 4, b + (b - a) / 4, b});
        else if (sa != sb)
            out.push_back(RootBox<NFS>{p, a, b, std::nullopt});
        if (i < crit.size() && matched[i] >= 0)
            out.push_back(mroots[(std::size_t)matched[i]]);
    }
    for (std::size_t i = 0; i + 1 < out.size(); ++i)
        while (!(out[i].hi < out[i + 1].lo)) {
            nfdetail::shrink(out[i]);
            nfdetail::shrink(out[i + 1]);
        }
    return out;
}

/// Exact sign of q at the root isolated by box, given an isolating list for
/// all real roots of q; the caller guarantees q does not vanish there.
inline int sign_at_isolated(const Poly<NFS>& q, std::vector<RootBox<NFS>>& qroots,
                            RootBox<NFS>& box) {
    if (box.exact) return sign(q.eval(*box.exact));
    for (auto& qb : qroots)
        while (!(qb.hi < box.lo || box.hi < qb.lo)) {
            nfdetail::shrink(box);
            nfdetail::shrink(qb);
        }
    return sign(q.eval(box.mid()));  // q is root-free, hence sign-constant, on box
}

}  // namespace momcurve
