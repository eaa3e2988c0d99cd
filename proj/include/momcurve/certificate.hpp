#pragma once

// Machine-checkable certificates of non-existence: kernel polynomials that are
// nonnegative (or strictly positive) on the curve y = x^d, the quadratic-form
// identity tying them to the core matrix, and an independent verifier.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "matrix.hpp"
#include "moment.hpp"
#include "poly.hpp"
#include "rational.hpp"

namespace momcurve {

/// h_{ij}(r_hat, s_hat) = sum over 0 <= k,l <= nd with 0 < k+l = i+dj of
/// (r_k r_l + s_k s_l): the coefficient of beta_ij in <C r,r> + <C s,s>.
template <class T>
T h_coeff(const Vec<T>& r, const Vec<T>& s, int i, int j, int n, int d) {
    if (i < 0 || i >= d) throw PreconditionViolated("h_coeff wants 0 <= i < d");
    const int nd = n * d;
    const int p = i + d * j;
    T acc(0);
    for (int k = std::max(0, p - nd); k <= nd && k <= p; ++k) {
        int l = p - k;
        if (k + l == 0) continue;
        acc = acc + r[(std::size_t)k] * r[(std::size_t)l] + s[(std::size_t)k] * s[(std::size_t)l];
    }
    return acc;
}

/// True iff h_coeff vanishes on every auxiliary index (i,j) in F.
template <class T>
bool aux_requirements_met(const Vec<T>& r, const Vec<T>& s, int n, int d) {
    for (const auto& [i, j] : aux_index_set(n, d))
        if (sign(h_coeff(r, s, i, j, n, d)) != 0) return false;
    return true;
}

/// The two sides of the rearranged quadratic-form identity
/// <C[A] r, r> + <C[A] s, s> = r_0^2 + s_0^2 + sum_{(i,j) notin F} h_ij beta_ij.
template <class T>
struct QuadformIdentity {
    T lhs, rhs;
    bool equal;
};

template <class T>
QuadformIdentity<T> quadform_identity_check(const MomentSequence<T>& seq,
                                            const AuxAssignment<T>& aux, const Vec<T>& r,
                                            const Vec<T>& s) {
    const int n = seq.n, d = seq.d;
    if (!aux_requirements_met(r, s, n, d)) throw RequirementsNotMet();
    Mat<T> c = build_core(seq, aux).entries();
    T lhs = quad_form(c, r) + quad_form(c, s);
    auto fset = aux_index_set(n, d);
    auto in_f = [&](int i, int j) {
        return std::find(fset.begin(), fset.end(), IndexPair{i, j}) != fset.end();
    };
    T rhs = r[0] * r[0] + s[0] * s[0];
    for (int i = 0; i < d; ++i)
        for (int j = 0; i + d * j <= 2 * n * d; ++j) {
            if (i + j == 0 || i + j > 2 * n || in_f(i, j)) continue;
            rhs = rhs + h_coeff(r, s, i, j, n, d) * seq.beta(i, j);
        }
    return {lhs, rhs, sign(lhs - rhs) == 0};
}

/// p = sum h_ij (x^i y^j - beta_ij), together with the defect
/// <C r, r> + <C s, s>; p(x, x^d) = R(x)^2 + S(x)^2 - defect.
template <class T>
std::pair<BiPoly<T>, T> build_kernel_poly(const MomentSequence<T>& seq, const Vec<T>& r,
                                          const Vec<T>& s) {
    const int n = seq.n, d = seq.d;
    if (!aux_requirements_met(r, s, n, d)) throw RequirementsNotMet();
    BiPoly<T> p;
    T defect = r[0] * r[0] + s[0] * s[0];
    for (int i = 0; i < d; ++i)
        for (int j = 0; i + d * j <= 2 * n * d; ++j) {
            if (i + j == 0) continue;
            T h = h_coeff(r, s, i, j, n, d);
            if (sign(h) == 0) continue;
            p.add({i, j}, h);
            if (i + j <= 2 * n) {
                p.add({0, 0}, T(0) - h * seq.beta(i, j));
                defect = defect + h * seq.beta(i, j);
            }
        }
    return {std::move(p), defect};
}

// ---------------------------------------------------------------------------
// Certificates.
// ---------------------------------------------------------------------------

enum class CertKind { StrictlyPositive, SmallZeroSet, NonPsdSubmatrix, NoPsdCompletion };

inline const char* to_string(CertKind k) {
    switch (k) {
        case CertKind::StrictlyPositive: return "StrictlyPositive";
        case CertKind::SmallZeroSet: return "SmallZeroSet";
        case CertKind::NonPsdSubmatrix: return "NonPsdSubmatrix";
        default: return "NoPsdCompletion";
    }
}

template <class T>
struct CurveCertificate {
    CertKind kind = CertKind::StrictlyPositive;
    Vec<T> r_hat, s_hat;               // witness vectors (first two kinds), length nd+1
    T epsilon = T(0);                  // StrictlyPositive: p >= epsilon > 0 on the curve
    int zero_bound = 0;                // SmallZeroSet: #curve zeros of p <= zero_bound
    std::vector<int> submatrix_indices;  // NonPsdSubmatrix: 1-based rows/cols of C
};

template <class T>
struct VerifyResult {
    bool ok = false;
    std::string reason;
    explicit operator bool() const { return ok; }
};

namespace detail {

template <class T>
Poly<T> poly_of(const Vec<T>& v) {
    return Poly<T>(std::vector<T>(v.begin(), v.end()));
}

/// p(x, x^d) as a univariate polynomial.
template <class T>
Poly<T> restrict_to_curve(const BiPoly<T>& p, int d) {
    std::vector<T> c;
    for (const auto& [m, coef] : p.terms) {
        int e = m.i + d * m.j;
        if ((int)c.size() <= e) c.resize((std::size_t)e + 1, T(0));
        c[(std::size_t)e] = c[(std::size_t)e] + coef;
    }
    return Poly<T>(std::move(c));
}

}  // namespace detail

// The NoPsdCompletion verifier re-runs the d=4 completion analysis from
// scratch; that code lives with the solver.  To keep this header independent
// of the solver the check is dispatched through a hook which solver.hpp
// installs on first use.
template <class T>
inline std::function<VerifyResult<T>(const MomentSequence<T>&)> completion_verifier{};

/// Independent re-check of every claim a certificate makes, from beta alone.
template <class T>
VerifyResult<T> verify_certificate(const MomentSequence<T>& seq,
                                   const CurveCertificate<T>& cert) {
    const int n = seq.n, d = seq.d, nd = n * d;
    auto fail = [](std::string why) { return VerifyResult<T>{false, std::move(why)}; };

    if (cert.kind == CertKind::NonPsdSubmatrix) {
        if (cert.submatrix_indices.empty()) return fail("empty submatrix index set");
        // every touched Hankel slot must be a genuine moment (aux-independent)
        Mat<T> sub((int)cert.submatrix_indices.size(), (int)cert.submatrix_indices.size());
        for (std::size_t a = 0; a < cert.submatrix_indices.size(); ++a)
            for (std::size_t b = 0; b < cert.submatrix_indices.size(); ++b) {
                int k = cert.submatrix_indices[a], l = cert.submatrix_indices[b];
                if (k < 1 || k > nd + 1 || l < 1 || l > nd + 1) return fail("index out of range");
                int p = k + l - 2;
                int i = p % d, j = p / d;
                if (i + j > 2 * n) return fail("submatrix depends on an auxiliary value");
                sub((int)a, (int)b) = seq.beta(i, j);
            }
        if (psd_status(sub).kind != PsdKind::Indefinite)
            return fail("named submatrix is not indefinite");
        return {true, ""};
    }
    if (cert.kind == CertKind::NoPsdCompletion) {
        if (!completion_verifier<T>)
            return fail("NoPsdCompletion verification needs the solver module loaded");
        return completion_verifier<T>(seq);
    }

    if ((int)cert.r_hat.size() != nd + 1 || (int)cert.s_hat.size() != nd + 1)
        return fail("witness vectors must have nd+1 entries");
    if (!aux_requirements_met(cert.r_hat, cert.s_hat, n, d))
        return fail("auxiliary requirements violated");
    auto [p, defect] = build_kernel_poly(seq, cert.r_hat, cert.s_hat);
    if (sign(riesz(seq, p)) != 0) return fail("Riesz functional does not annihilate p");
    Poly<T> curve = detail::restrict_to_curve(p, d);
    Poly<T> rr = detail::poly_of(cert.r_hat), ss = detail::poly_of(cert.s_hat);
    Poly<T> squares = rr * rr + ss * ss;

    if (cert.kind == CertKind::StrictlyPositive) {
        if (sign(cert.epsilon) <= 0) return fail("epsilon must be positive");
        if (!(cert.epsilon == T(0) - defect)) return fail("epsilon does not match the defect");
        // p(x,x^d) = R^2 + S^2 + epsilon, coefficientwise
        if (!(curve == squares + Poly<T>{cert.epsilon}))
            return fail("square decomposition identity fails");
        return {true, ""};
    }

    // SmallZeroSet
    if (sign(defect) != 0) return fail("defect must vanish");
    if (!(curve == squares)) return fail("square decomposition identity fails");
    Poly<T> zeroes = ss.is_zero() ? rr : gcd(rr, ss);  // curve zeros of p
    if (zeroes.is_zero()) return fail("p vanishes identically on the curve");
    int count = zeroes.degree() < 1 ? 0 : (int)isolate_real_roots(zeroes).size();
    if (count > cert.zero_bound) return fail("zero bound smaller than the actual zero count");
    int rk = rank(build_moment_matrix(seq).entries);
    if (!(cert.zero_bound < rk)) return fail("zero bound does not beat rank M_n");
    return {true, ""};
}

}  // namespace momcurve
