#pragma once

// The auxiliary index set F, the (nd+1) x (nd+1) Hankel core matrix C[A], its
// compression C_hat, the permutation identifying C_hat with M_hat_n, and the
// generators of pure sequences (from Hankel data, and the d=3 boundary
// construction).

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"
#include "moment.hpp"
#include "rational.hpp"

namespace momcurve {

using IndexPair = std::pair<int, int>;

/// F = {(i,j) : 0 <= i < d, i + dj <= 2nd, i + j > 2n}, ordered by (j, i).
/// Cardinality (d-1)(d-2)/2; empty for d <= 2.
inline std::vector<IndexPair> aux_index_set(int n, int d) {
    if (d < 1) throw PreconditionViolated("d must be positive");
    std::vector<IndexPair> out;
    for (int i = 0; i < d; ++i)
        for (int j = 0; i + d * j <= 2 * n * d; ++j)
            if (i + j > 2 * n) out.push_back({i, j});
    std::sort(out.begin(), out.end(),
              [](const IndexPair& a, const IndexPair& b) {
                  return a.second != b.second ? a.second < b.second : a.first < b.first;
              });
    return out;
}

/// F_hat = {(i,j) : 0 <= i < d, i + dj <= nd, i + j > n}: the h-indices whose
/// rows/columns are deleted when compressing C (or a full Hankel matrix).
inline bool in_f_hat(int i, int j, int n, int d) {
    return i < d && i + d * j <= n * d && i + j > n;
}

template <class T>
using AuxAssignment = std::map<IndexPair, T>;

/// The Hankel core matrix: entry (k,l) (1-based) is h_{k+l-2} where
/// h_p = beta_{p mod d, floor(p/d)} when that is a genuine moment and the
/// assigned auxiliary constant A_{ij} when (p mod d, floor(p/d)) is in F.
template <class T>
struct CoreMatrix {
    int n = 0, d = 0;
    std::vector<T> h;             // h_0 .. h_{2nd}
    std::vector<char> aux_slot;   // aux_slot[p] == 1 iff h_p is auxiliary

    int dim() const { return n * d + 1; }
    const T& entry(int k, int l) const { return h[(std::size_t)(k + l - 2)]; }  // 1-based

    Mat<T> entries() const {
        Mat<T> m(dim(), dim());
        for (int k = 1; k <= dim(); ++k)
            for (int l = 1; l <= dim(); ++l) m(k - 1, l - 1) = entry(k, l);
        return m;
    }
};

template <class T>
CoreMatrix<T> build_core(const MomentSequence<T>& seq, const AuxAssignment<T>& aux) {
    const int n = seq.n, d = seq.d;
    auto fset = aux_index_set(n, d);
    if ((int)aux.size() != (int)fset.size()) throw WrongAuxKeys();
    for (const auto& p : fset)
        if (!aux.count(p)) throw WrongAuxKeys();
    CoreMatrix<T> c;
    c.n = n;
    c.d = d;
    c.h.resize(2 * n * d + 1, T(0));
    c.aux_slot.assign(2 * n * d + 1, 0);
    for (int p = 0; p <= 2 * n * d; ++p) {
        int i = p % d, j = p / d;
        if (i + j <= 2 * n) {
            c.h[p] = seq.beta(i, j);
        } else {
            c.h[p] = aux.at({i, j});
            c.aux_slot[p] = 1;
        }
    }
    return c;
}

/// 1-based row/column numbers of C that survive the compression.
inline std::vector<int> core_retained_indices(int n, int d) {
    std::vector<int> keep;
    for (int k = 1; k <= n * d + 1; ++k) {
        int i = (k - 1) % d, j = (k - 1) / d;
        if (!in_f_hat(i, j, n, d)) keep.push_back(k);
    }
    return keep;
}

/// C_hat: delete row/column k whenever (I_k, J_k) in F_hat. Result has
/// dimension psi_{n,d} and touches no auxiliary slot.
template <class T>
Mat<T> compress_core(const CoreMatrix<T>& c) {
    auto keep = core_retained_indices(c.n, c.d);
    Mat<T> m((int)keep.size(), (int)keep.size());
    for (std::size_t a = 0; a < keep.size(); ++a)
        for (std::size_t b = 0; b < keep.size(); ++b) m((int)a, (int)b) = c.entry(keep[a], keep[b]);
    return m;
}

/// The permutation sigma on {1..psi_{n,d}} with sigma(khat) = K_k: position
/// khat of a retained row of C maps to the degree-lex position of the
/// monomial X^{I_k} Y^{J_k} among the compressed basis B_hat.
inline std::vector<int> core_permutation(int n, int d) {
    if (d > n) throw PreconditionViolated("core permutation needs d <= n");
    auto keep = core_retained_indices(n, d);
    auto basis = compressed_monomials(n, d);
    auto pos = [&](int i, int j) {
        for (int t = 0; t < (int)basis.size(); ++t)
            if (basis[t].i == i && basis[t].j == j) return t + 1;
        throw PreconditionViolated("retained index not in compressed basis");
    };
    std::vector<int> sigma(keep.size());
    for (std::size_t a = 0; a < keep.size(); ++a) {
        int i = (keep[a] - 1) % d, j = (keep[a] - 1) / d;
        sigma[a] = pos(i, j);
    }
    // bijectivity by enumeration
    std::vector<int> seen = sigma;
    std::sort(seen.begin(), seen.end());
    for (std::size_t a = 0; a < seen.size(); ++a)
        if (seen[a] != (int)a + 1) throw PreconditionViolated("core permutation not bijective");
    return sigma;
}

/// True iff permuting rows/columns of C_hat by core_permutation yields
/// exactly M_hat_n(beta), entrywise.
template <class T>
bool verify_equivalence(const MomentSequence<T>& seq, const CoreMatrix<T>& c) {
    auto mhat = central_compression(build_moment_matrix(seq), seq.d);
    auto chat = compress_core(c);
    if (mhat.rows() != chat.rows()) return false;
    auto sigma = core_permutation(seq.n, seq.d);
    for (int a = 0; a < chat.rows(); ++a)
        for (int b = 0; b < chat.rows(); ++b)
            if (!(chat(a, b) == mhat(sigma[a] - 1, sigma[b] - 1))) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Generators of pure sequences.
// ---------------------------------------------------------------------------

/// Unique pure beta with core data h: beta_ij := h_{i+dj}. Requires the
/// compression H_hat of the Hankel matrix (h_{k+l-2}) to be positive definite.
template <class T>
MomentSequence<T> generate_pure_from_hankel(const std::vector<T>& h, int n, int d) {
    if ((int)h.size() != 2 * n * d + 1)
        throw PreconditionViolated("need exactly 2nd+1 Hankel values");
    CoreMatrix<T> c;
    c.n = n;
    c.d = d;
    c.h = h;
    c.aux_slot.assign(h.size(), 0);
    if (psd_status(compress_core(c)).kind != PsdKind::PositiveDefinite) throw CompressionNotPD();
    MomentSequence<T> seq(n, d);
    for (int i = 0; i <= 2 * n; ++i)
        for (int j = 0; i + j <= 2 * n; ++j) seq.beta(i, j) = h[(std::size_t)(i + d * j)];
    if (!seq.normalized()) throw PreconditionViolated("h_0 must be 1");
    return seq;
}

/// phi[beta] for d = 3: h^T C_1^{-1} h with C_1 the leading (nd-1) block of C
/// and h = (h_{nd-1}, ..., h_{2nd-3}); independent of beta_{1,2n-1}, beta_{0,2n}.
template <class T>
T compute_phi_d3(const MomentSequence<T>& seq) {
    if (seq.d != 3) throw PreconditionViolated("phi formula is the d=3 one");
    const int nd = seq.n * seq.d;
    // all entries involved are genuine moments, so fill aux slots arbitrarily
    AuxAssignment<T> aux;
    for (const auto& p : aux_index_set(seq.n, seq.d)) aux[p] = T(0);
    CoreMatrix<T> c = build_core(seq, aux);
    Mat<T> c1(nd - 1, nd - 1);
    for (int k = 1; k <= nd - 1; ++k)
        for (int l = 1; l <= nd - 1; ++l) c1(k - 1, l - 1) = c.entry(k, l);
    Vec<T> h(nd - 1);
    for (int t = 0; t < nd - 1; ++t) h[t] = c.h[(std::size_t)(nd - 1 + t)];
    return dot(h, solve_linear(c1, h));
}

/// Boundary sequence: beta_{1,2n-1} := phi[beta'], with beta_{0,2n} inflated
/// if needed so M_n stays PSD. Input must be pure with d = 3.
template <class T>
MomentSequence<T> generate_d3_boundary(const MomentSequence<T>& seq_in) {
    if (is_pure(seq_in) != Purity::Pure) throw NotPure("d=3 boundary needs a pure input");
    MomentSequence<T> seq = seq_in;
    seq.beta(1, 2 * seq.n - 1) = compute_phi_d3(seq_in);
    T bump(1);
    while (psd_status(build_moment_matrix(seq).entries).kind == PsdKind::Indefinite) {
        seq.beta(0, 2 * seq.n) = seq.beta(0, 2 * seq.n) + bump;
        bump = bump + bump;
    }
    return seq;
}

}  // namespace momcurve
