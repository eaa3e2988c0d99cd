#pragma once

// Univariate Hankel machinery over exact rationals: recursive generation,
// one-missing-entry PSD completion intervals (with quadratic-extension
// endpoints), the two-missing-entry representability test with witness,
// flat extensions, and atomic-measure extraction.

#include <optional>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "poly.hpp"
#include "quadext.hpp"
#include "rational.hpp"

namespace momcurve {

/// Hankel matrix of gamma_0 .. gamma_{2m}: size m+1, entry (i,j) = gamma_{i+j}.
template <class T>
Mat<T> hankel_matrix(const std::vector<T>& g) {
    if (g.size() % 2 == 0) throw PreconditionViolated("need an odd number of moments");
    const int m1 = ((int)g.size() + 1) / 2;
    Mat<T> h(m1, m1);
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m1; ++j) h(i, j) = g[(std::size_t)(i + j)];
    return h;
}

/// True iff every kernel vector of H ending in 0, shifted down one position,
/// stays in the kernel.
template <class T>
bool recursively_generated(const Mat<T>& h) {
    const int n = h.rows();
    auto basis = kernel(h);
    if (basis.empty()) return true;
    // reduce to a basis of the subspace {v in ker H : v_{n-1} = 0}
    std::size_t piv = basis.size();
    for (std::size_t k = 0; k < basis.size(); ++k)
        if (sign(basis[k][n - 1]) != 0) {
            piv = k;
            break;
        }
    if (piv < basis.size()) {
        for (std::size_t k = 0; k < basis.size(); ++k) {
            if (k == piv || sign(basis[k][n - 1]) == 0) continue;
            T f = basis[k][n - 1] / basis[piv][n - 1];
            for (int t = 0; t < n; ++t) basis[k][t] = basis[k][t] - f * basis[piv][t];
        }
        basis.erase(basis.begin() + (long)piv);
    }
    for (const auto& v : basis) {
        Vec<T> shifted(n, T(0));
        for (int t = 0; t + 1 < n; ++t) shifted[t + 1] = v[t];
        for (const auto& e : mat_vec(h, shifted))
            if (sign(e) != 0) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// One missing entry: A(x) = [[A1, a, b], [a^T, alpha, x], [b^T, x, beta]].
// ---------------------------------------------------------------------------

struct OneMissingResult {
    Quad x_minus, x_plus;
    int rank_endpoint;  // rank A(x_pm) = max(rank A2, rank A3)
    int rank_interior;  // rank_endpoint + 1 (when x_- < x_+)
};

template <class T>
Mat<T> assemble_one_missing(const Mat<T>& a1, const Vec<T>& a, const Vec<T>& b, const T& alpha,
                            const T& beta, const T& x) {
    const int m = a1.rows();
    Mat<T> out(m + 2, m + 2);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out(i, j) = a1(i, j);
    for (int i = 0; i < m; ++i) {
        out(i, m) = out(m, i) = a[i];
        out(i, m + 1) = out(m + 1, i) = b[i];
    }
    out(m, m) = alpha;
    out(m + 1, m + 1) = beta;
    out(m, m + 1) = out(m + 1, m) = x;
    return out;
}

/// PSD completion interval for the single missing corner x: A(x) PSD iff
/// x in [x_-, x_+] with x_pm = b^T A1^{-1} a +- sqrt((A2/A1)(A3/A1)).
inline OneMissingResult complete_one_missing(const Mat<Rat>& a1, const Vec<Rat>& a,
                                             const Vec<Rat>& b, const Rat& alpha,
                                             const Rat& beta) {
    const int m = a1.rows();
    Lu<Rat> lu(a1);
    if (lu.singular() || psd_status(a1).kind != PsdKind::PositiveDefinite)
        throw PreconditionViolated("one-missing completion: A1 not positive definite");
    Mat<Rat> a2(m + 1, m + 1), a3(m + 1, m + 1);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a2(i, j) = a3(i, j) = a1(i, j);
    for (int i = 0; i < m; ++i) {
        a2(i, m) = a2(m, i) = a[i];
        a3(i, m) = a3(m, i) = b[i];
    }
    a2(m, m) = alpha;
    a3(m, m) = beta;
    auto s2 = psd_status(a2), s3 = psd_status(a3);
    if (!s2.is_psd()) throw PreconditionViolated("one-missing completion: A2 not PSD");
    if (!s3.is_psd()) throw PreconditionViolated("one-missing completion: A3 not PSD");
    Rat center = dot(b, lu.solve(a));
    Rat schur2 = alpha - dot(a, lu.solve(a));  // A2 / A1
    Rat schur3 = beta - dot(b, lu.solve(b));   // A3 / A1
    Quad root = Quad::sqrt(schur2 * schur3);
    OneMissingResult res;
    res.x_minus = Quad(center) - root;
    res.x_plus = Quad(center) + root;
    res.rank_endpoint = std::max(s2.rank, s3.rank);
    res.rank_interior = res.rank_endpoint + 1;
    return res;
}

// ---------------------------------------------------------------------------
// Two missing trailing entries gamma_{2m-2}, gamma_{2m-1}.
// ---------------------------------------------------------------------------

struct TwoMissingResult {
    bool solvable = false;
    std::optional<std::pair<Rat, Rat>> witness;  // (gamma_{2m-2}, gamma_{2m-1}) = (y0, x0)
};

namespace detail {

/// A rational strictly inside the Quad interval; endpoints returned verbatim
/// when the interval degenerates (they are rational in that case).
inline Rat rational_inside(const Quad& lo, const Quad& hi) {
    if (lo == hi) return lo.to_rat();
    for (int digits = 3;; digits += 4) {
        Rat lb = lo.bracket(digits).second;
        Rat ub = hi.bracket(digits).first;
        if (lb < ub) return simplest_rational_in(lb, ub);
    }
}

}  // namespace detail

/// gamma has size 2m+1; entries at positions 2m-2 and 2m-1 are ignored
/// (treated as missing). Decides whether they can be filled so that the full
/// sequence admits a representing measure on R, with an explicit witness.
inline TwoMissingResult two_missing_solvable(std::vector<Rat> g) {
    if (g.size() % 2 == 0 || g.size() < 7)
        throw PreconditionViolated("need gamma_0..gamma_{2m} with m >= 3");
    const int m = ((int)g.size() - 1) / 2;
    auto lead = [&](int k) {  // leading k x k Hankel block from known entries
        Mat<Rat> h(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) h(i, j) = g[(std::size_t)(i + j)];
        return h;
    };
    Mat<Rat> h1 = lead(m - 2), h2 = lead(m - 1);
    Vec<Rat> u(m - 2), w(m - 2), s(m - 1);
    for (int i = 0; i < m - 2; ++i) u[i] = g[(std::size_t)(m + i)];
    for (int i = 0; i < m - 2; ++i) w[i] = g[(std::size_t)(m - 2 + i)];
    for (int i = 0; i < m - 1; ++i) s[i] = g[(std::size_t)(m - 1 + i)];

    // A_tilde = [[H1, u], [u^T, gamma_{2m}]]; checked first so that inputs
    // failing it report "no measure" rather than a precondition error
    Mat<Rat> atil(m - 1, m - 1);
    for (int i = 0; i < m - 2; ++i)
        for (int j = 0; j < m - 2; ++j) atil(i, j) = h1(i, j);
    for (int i = 0; i < m - 2; ++i) atil(i, m - 2) = atil(m - 2, i) = u[i];
    atil(m - 2, m - 2) = g[(std::size_t)(2 * m)];
    if (!psd_status(atil).is_psd()) return {false, std::nullopt};

    if (psd_status(h1).kind != PsdKind::PositiveDefinite ||
        psd_status(h2).kind != PsdKind::PositiveDefinite) {
        // degenerate fallback: try the all-zero completion and accept it when
        // the completed Hankel matrix is PSD, recursively generated, and flat
        g[(std::size_t)(2 * m - 2)] = g[(std::size_t)(2 * m - 1)] = rat(0);
        Mat<Rat> h = hankel_matrix(g);
        if (psd_status(h).is_psd() && recursively_generated(h) &&
            rank(h) == rank(h.leading(m))) {
            return {true, std::make_pair(rat(0), rat(0))};
        }
        throw PreconditionViolated("two-missing test: H1 or H2 not positive definite");
    }

    Lu<Rat> lu1(h1), lu2(h2);
    Rat corner = dot(u, lu1.solve(w));                              // u^T H1^{-1} w
    Rat lbound = dot(s, lu2.solve(s));                              // s^T H2^{-1} s
    Rat q = schur_scalar(h2, m - 2) * schur_scalar(atil, m - 2);    // (H2/H1)(Atil/H1)
    Quad root = Quad::sqrt(q);
    Quad yhi = Quad(corner) + root;
    if (sign(Quad(lbound) - yhi) > 0) return {false, std::nullopt};

    // witness: y0 in [max(lbound, corner - sqrt(q)), corner + sqrt(q)]
    Quad ylo = Quad(corner) - root;
    if (sign(Quad(lbound) - ylo) > 0) ylo = Quad(lbound);
    Rat y0 = detail::rational_inside(ylo, yhi);

    // then x0 from the one-missing problem on the full matrix:
    // A1 = H2, a = s (alpha = y0), b = (u, y0) (beta = gamma_{2m})
    Vec<Rat> b(m - 1);
    for (int i = 0; i < m - 2; ++i) b[i] = u[i];
    b[m - 2] = y0;
    auto om = complete_one_missing(h2, s, b, y0, g[(std::size_t)(2 * m)]);
    Rat x0 = detail::rational_inside(om.x_minus, om.x_plus);
    return {true, std::make_pair(y0, x0)};
}

// ---------------------------------------------------------------------------
// Flat extensions and measure extraction.
// ---------------------------------------------------------------------------

/// Generating polynomial of a PSD, recursively generated Hankel matrix: the
/// monic polynomial whose roots carry the representing measure. When H is
/// positive definite the sequence is extended flatly with
/// gamma_{2m+1} := odd_choice, gamma_{2m+2} := v^T H^{-1} v.
inline Poly<Rat> flat_extension(const std::vector<Rat>& g, const Rat& odd_choice = rat(0)) {
    Mat<Rat> h = hankel_matrix(g);
    auto st = psd_status(h);
    if (!st.is_psd()) throw NotPsd("Hankel matrix is not PSD");
    if (!recursively_generated(h)) throw NotRecursivelyGenerated();
    const int m1 = h.rows();  // m+1
    int r = st.rank;
    std::vector<Rat> coeffs;
    if (r < m1) {
        // column r depends on columns 0..r-1; leading r x r block is PD
        Vec<Rat> rhs(r);
        for (int i = 0; i < r; ++i) rhs[i] = g[(std::size_t)(i + r)];
        coeffs = solve_linear(h.leading(r), rhs);
    } else {
        std::vector<Rat> ext = g;
        ext.push_back(odd_choice);
        Vec<Rat> v(m1);
        for (int i = 0; i < m1; ++i) v[i] = ext[(std::size_t)(m1 + i)];
        coeffs = solve_linear(h, v);
        r = m1;
    }
    std::vector<Rat> gc(coeffs.size() + 1);
    for (std::size_t i = 0; i < coeffs.size(); ++i) gc[i] = -coeffs[i];
    gc[coeffs.size()] = rat(1);
    return Poly<Rat>(std::move(gc));
}

struct Atom {
    Rat x;        // atom location (exact, or a refined approximation)
    bool exact;   // true when x is the exact algebraic (rational) location
    Rat weight;   // exact when all locations are exact, else approximation
};

struct AtomicMeasure {
    std::vector<Atom> atoms;
    int d = 1;  // curve degree: the bivariate atom is (x, x^d)

    Rat moment(int p) const {
        Rat acc(0);
        for (const auto& at : atoms) {
            Rat e(1);
            for (int k = 0; k < p; ++k) e *= at.x;
            acc += at.weight * e;
        }
        return acc;
    }
};

/// Extract an atomic representing measure for gamma_0..gamma_{2m}. Residuals
/// are recomputed exactly from the (possibly approximate) atom data and must
/// satisfy |residual| <= tol * max(1, |gamma_p|) for every p.
inline AtomicMeasure extract_measure(const std::vector<Rat>& g,
                                     const Rat& tol = Rat(1, 1000000000),
                                     const Rat& odd_choice = rat(0)) {
    Poly<Rat> gen = flat_extension(g, odd_choice);
    const int r = gen.degree();
    auto boxes = isolate_real_roots(gen);
    if ((int)boxes.size() != r)
        throw NumericalRootFailure("generating polynomial must have distinct real roots");
    bool all_exact = true;
    for (const auto& b : boxes) all_exact = all_exact && b.exact.has_value();

    Rat width = rat(1, 1000000);
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<Rat> xs(boxes.size());
        for (std::size_t k = 0; k < boxes.size(); ++k) {
            boxes[k].refine(width);
            xs[k] = boxes[k].mid();
        }
        // Vandermonde solve on gamma_0..gamma_{r-1}
        Mat<Rat> vdm(r, r);
        for (int p = 0; p < r; ++p)
            for (int k = 0; k < r; ++k) {
                Rat e(1);
                for (int t = 0; t < p; ++t) e *= xs[(std::size_t)k];
                vdm(p, k) = e;
            }
        Vec<Rat> rhs(r);
        for (int p = 0; p < r; ++p) rhs[p] = g[(std::size_t)p];
        Vec<Rat> wts;
        try {
            wts = solve_linear(vdm, rhs);
        } catch (const SingularMatrix&) {
            width /= 4096;
            continue;
        }
        bool ok = true;
        for (const auto& wt : wts) ok = ok && sgn(wt) > 0;
        for (int p = 0; ok && p < (int)g.size(); ++p) {
            Rat acc(0);
            for (int k = 0; k < r; ++k) {
                Rat e(1);
                for (int t = 0; t < p; ++t) e *= xs[(std::size_t)k];
                acc += wts[(std::size_t)k] * e;
            }
            Rat err = acc - g[(std::size_t)p];
            if (sgn(err) < 0) err = -err;
            Rat scale = g[(std::size_t)p] < 0 ? Rat(-g[(std::size_t)p]) : g[(std::size_t)p];
            if (scale < 1) scale = 1;
            ok = ok && err <= tol * scale;
        }
        if (ok) {
            AtomicMeasure mu;
            for (int k = 0; k < r; ++k)
                mu.atoms.push_back({xs[(std::size_t)k], boxes[(std::size_t)k].exact.has_value(),
                                    wts[(std::size_t)k]});
            return mu;
        }
        if (all_exact)
            throw NumericalRootFailure("exact atoms fail to reproduce the moments");
        width /= 4096;
    }
    throw NumericalRootFailure("residual tolerance not reached");
}

}  // namespace momcurve
