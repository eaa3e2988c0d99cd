#pragma once

// Bivariate moment sequences beta = (beta_ij), the Riesz functional, moment
// matrices in degree-lexicographic order, column relations, the pureness test
// for the curve y = x^d, and the central compression.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "rational.hpp"

namespace momcurve {

struct Mono {
    int i = 0, j = 0;  // x^i y^j
    int degree() const { return i + j; }
    friend bool operator==(const Mono& a, const Mono& b) { return a.i == b.i && a.j == b.j; }
    friend bool operator<(const Mono& a, const Mono& b) {
        if (a.degree() != b.degree()) return a.degree() < b.degree();
        return a.j < b.j;  // degree-lex: 1, X, Y, X^2, XY, Y^2, ...
    }
    std::string str() const {
        std::string s;
        if (i) s += "X" + (i > 1 ? "^" + std::to_string(i) : "");
        if (j) s += "Y" + (j > 1 ? "^" + std::to_string(j) : "");
        return s.empty() ? "1" : s;
    }
};

/// 1-based degree-lex position of x^i y^j: binom(i+j+1,2) + j + 1.
inline int dlex_position(int i, int j) {
    int t = i + j;
    return t * (t + 1) / 2 + j + 1;
}

/// All monomials of total degree <= n in degree-lex order.
inline std::vector<Mono> monomials_up_to(int n) {
    std::vector<Mono> out;
    for (int t = 0; t <= n; ++t)
        for (int j = 0; j <= t; ++j) out.push_back({t - j, j});
    return out;
}

/// dim P_n = (n+1)(n+2)/2.
inline int poly_space_dim(int n) { return (n + 1) * (n + 2) / 2; }

/// psi_{n,d} = d(2n-d+3)/2, the dimension of the compressed objects.
inline int compressed_dim(int n, int d) { return d * (2 * n - d + 3) / 2; }

// ---------------------------------------------------------------------------
// Sparse bivariate polynomials (for relation tagging and the Riesz functional).
// ---------------------------------------------------------------------------

template <class T>
struct BiPoly {
    std::map<Mono, T> terms;  // nonzero coefficients only

    void add(Mono m, T c) {
        auto it = terms.find(m);
        if (it == terms.end()) {
            if (sign(c) != 0) terms.emplace(m, std::move(c));
            return;
        }
        it->second = it->second + c;
        if (sign(it->second) == 0) terms.erase(it);
    }
    int degree() const {
        int deg = -1;
        for (const auto& [m, c] : terms) deg = std::max(deg, m.degree());
        return deg;
    }
    std::string str() const {
        if (terms.empty()) return "0";
        std::string s;
        for (const auto& [m, c] : terms) {
            if (!s.empty()) s += " + ";
            s += "(" + scalar_str(c) + ")*" + m.str();
        }
        return s;
    }

  private:
    static std::string scalar_str(const Rat& c) { return to_string(c); }
    template <class U>
    static std::string scalar_str(const U& c) {
        return c.str();
    }
};

// ---------------------------------------------------------------------------
// Moment sequences.
// ---------------------------------------------------------------------------

template <class T>
struct MomentSequence {
    int n = 0;  // half-degree: moments beta_ij given for i+j <= 2n
    int d = 0;  // curve degree for y = x^d
    std::vector<T> beta_;  // dense, degree-lex over i+j <= 2n

    MomentSequence() {}
    MomentSequence(int n_, int d_) : n(n_), d(d_), beta_(poly_space_dim(2 * n_), T(0)) {
        if (n <= 0 || d <= 0) throw PreconditionViolated("n, d must be positive");
        beta(0, 0) = T(1);
    }

    T& beta(int i, int j) { return beta_[dlex_position(i, j) - 1]; }
    const T& beta(int i, int j) const {
        if (i < 0 || j < 0 || i + j > 2 * n) throw DegreeTooHigh("moment index out of range");
        return beta_[dlex_position(i, j) - 1];
    }

    bool normalized() const { return beta(0, 0) == T(1); }
};

template <class T>
T riesz(const MomentSequence<T>& seq, const BiPoly<T>& p) {
    if (p.degree() > 2 * seq.n) throw DegreeTooHigh("polynomial degree exceeds 2n");
    T acc(0);
    for (const auto& [m, c] : p.terms) acc = acc + c * seq.beta(m.i, m.j);
    return acc;
}

// ---------------------------------------------------------------------------
// Moment matrices.
// ---------------------------------------------------------------------------

template <class T>
struct MomentMatrix {
    Mat<T> entries;
    std::vector<Mono> labels;  // row/column monomials, degree-lex
};

template <class T>
MomentMatrix<T> build_moment_matrix(const MomentSequence<T>& seq) {
    MomentMatrix<T> mm;
    mm.labels = monomials_up_to(seq.n);
    const int dim = (int)mm.labels.size();
    mm.entries = Mat<T>(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c)
            mm.entries(r, c) = seq.beta(mm.labels[r].i + mm.labels[c].i,
                                        mm.labels[r].j + mm.labels[c].j);
    return mm;
}

/// A kernel vector of M_n tagged with the polynomial it encodes.
template <class T>
struct ColumnRelation {
    Vec<T> coeffs;
    BiPoly<T> poly;
};

template <class T>
std::vector<ColumnRelation<T>> column_relation_basis(const MomentMatrix<T>& mm) {
    std::vector<ColumnRelation<T>> out;
    for (auto& v : kernel(mm.entries)) {
        ColumnRelation<T> rel;
        for (std::size_t k = 0; k < v.size(); ++k)
            if (sign(v[k]) != 0) rel.poly.add(mm.labels[k], v[k]);
        rel.coeffs = std::move(v);
        out.push_back(std::move(rel));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Central compression and the pureness test.
// ---------------------------------------------------------------------------

/// M_hat_n: delete all rows/columns labeled X^{d+p} Y^q. Dimension psi_{n,d}.
template <class T>
Mat<T> central_compression(const MomentMatrix<T>& mm, int d) {
    std::vector<int> keep;
    for (int k = 0; k < (int)mm.labels.size(); ++k)
        if (mm.labels[k].i < d) keep.push_back(k);
    return mm.entries.submatrix(keep, keep);
}

/// Monomials labeling the compressed matrix, degree-lex.
inline std::vector<Mono> compressed_monomials(int n, int d) {
    std::vector<Mono> out;
    for (const Mono& m : monomials_up_to(n))
        if (m.i < d) out.push_back(m);
    return out;
}

enum class Purity { Pure, NotPsd, MissingRelations, ExtraRelations };

inline const char* to_string(Purity p) {
    switch (p) {
        case Purity::Pure: return "Pure";
        case Purity::NotPsd: return "NotPsd";
        case Purity::MissingRelations: return "MissingRelations";
        default: return "ExtraRelations";
    }
}

/// Pure iff M_n PSD, every relation X^r Y^{s+1} = X^{r+d} Y^s (r+s <= n-d)
/// holds, and the central compression is positive definite (equivalently
/// rank M_n = psi_{n,d}).
template <class T>
Purity is_pure(const MomentSequence<T>& seq) {
    const int n = seq.n, d = seq.d;
    if (d > n) throw PreconditionViolated("pure framework requires d <= n");
    auto mm = build_moment_matrix(seq);
    if (psd_status(mm.entries).kind == PsdKind::Indefinite) return Purity::NotPsd;
    // relation X^r Y^{s+1} = X^{r+d} Y^s as columns of M_n: entrywise on beta
    for (int r = 0; r + d <= n; ++r)
        for (int s = 0; r + s <= n - d; ++s)
            for (int k = 0; k <= n; ++k)
                for (int l = 0; k + l <= n; ++l)
                    if (!(seq.beta(r + k, s + 1 + l) == seq.beta(r + d + k, s + l)))
                        return Purity::MissingRelations;
    if (psd_status(central_compression(mm, d)).kind != PsdKind::PositiveDefinite)
        return Purity::ExtraRelations;
    return Purity::Pure;
}

}  // namespace momcurve
