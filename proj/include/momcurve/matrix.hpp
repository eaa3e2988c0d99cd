#pragma once

// Dense exact linear algebra over an ordered-field scalar T (Rat, QuadExt,
// NumberFieldScalar): symmetric PSD classification by pivoted LDL, kernels,
// ranks, determinants, linear solves, Schur complements.
//
// Scalar requirements: default/int construction, +, -, *, /, ==, and a free
// function sign(x) -> {-1,0,+1} found by ADL.

#include <optional>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace momcurve {

template <class T>
using Vec = std::vector<T>;

template <class T>
class Mat {
  public:
    Mat() : rows_(0), cols_(0) {}
    Mat(int rows, int cols, T fill = T(0))
        : rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows) * cols, fill) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    T& operator()(int i, int j) { return e_[static_cast<std::size_t>(i) * cols_ + j]; }
    const T& operator()(int i, int j) const {
        return e_[static_cast<std::size_t>(i) * cols_ + j];
    }

    bool operator==(const Mat& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_;
    }

    Mat submatrix(const std::vector<int>& rs, const std::vector<int>& cs) const {
        Mat s(static_cast<int>(rs.size()), static_cast<int>(cs.size()));
        for (std::size_t i = 0; i < rs.size(); ++i)
            for (std::size_t j = 0; j < cs.size(); ++j) s((int)i, (int)j) = (*this)(rs[i], cs[j]);
        return s;
    }

    /// Leading k x k principal block.
    Mat leading(int k) const {
        std::vector<int> idx(k);
        for (int i = 0; i < k; ++i) idx[i] = i;
        return submatrix(idx, idx);
    }

    Vec<T> column(int j, int nrows = -1) const {
        if (nrows < 0) nrows = rows_;
        Vec<T> c(nrows);
        for (int i = 0; i < nrows; ++i) c[i] = (*this)(i, j);
        return c;
    }

    bool is_symmetric() const {
        if (rows_ != cols_) return false;
        for (int i = 0; i < rows_; ++i)
            for (int j = i + 1; j < cols_; ++j)
                if (!((*this)(i, j) == (*this)(j, i))) return false;
        return true;
    }

  private:
    int rows_, cols_;
    std::vector<T> e_;
};

template <class T>
Vec<T> mat_vec(const Mat<T>& m, const Vec<T>& v) {
    Vec<T> r(m.rows(), T(0));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r[i] = r[i] + m(i, j) * v[j];
    return r;
}

template <class T>
T dot(const Vec<T>& a, const Vec<T>& b) {
    T s(0);
    for (std::size_t i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
    return s;
}

/// Quadratic form v^T M v.
template <class T>
T quad_form(const Mat<T>& m, const Vec<T>& v) {
    return dot(v, mat_vec(m, v));
}

// ---------------------------------------------------------------------------
// LU factorization with partial (first-nonzero) pivoting; exact over a field.
// ---------------------------------------------------------------------------

template <class T>
class Lu {
  public:
    explicit Lu(Mat<T> a) : lu_(std::move(a)), sign_(1), singular_(false) {
        const int n = lu_.rows();
        perm_.resize(n);
        for (int i = 0; i < n; ++i) perm_[i] = i;
        for (int k = 0; k < n; ++k) {
            int piv = -1;
            for (int i = k; i < n; ++i)
                if (sign(lu_(i, k)) != 0) {
                    piv = i;
                    break;
                }
            if (piv < 0) {
                singular_ = true;
                return;
            }
            if (piv != k) {
                for (int j = 0; j < n; ++j) std::swap(lu_(piv, j), lu_(k, j));
                std::swap(perm_[piv], perm_[k]);
                sign_ = -sign_;
            }
            for (int i = k + 1; i < n; ++i) {
                T f = lu_(i, k) / lu_(k, k);
                lu_(i, k) = f;
                for (int j = k + 1; j < n; ++j) lu_(i, j) = lu_(i, j) - f * lu_(k, j);
            }
        }
    }

    bool singular() const { return singular_; }

    T det() const {
        if (singular_) return T(0);
        T d(sign_);
        for (int i = 0; i < lu_.rows(); ++i) d = d * lu_(i, i);
        return d;
    }

    Vec<T> solve(const Vec<T>& rhs) const {
        if (singular_) throw SingularMatrix();
        const int n = lu_.rows();
        Vec<T> x(n);
        for (int i = 0; i < n; ++i) x[i] = rhs[perm_[i]];
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < i; ++j) x[i] = x[i] - lu_(i, j) * x[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[i] = x[i] - lu_(i, j) * x[j];
            x[i] = x[i] / lu_(i, i);
        }
        return x;
    }

  private:
    Mat<T> lu_;
    std::vector<int> perm_;
    int sign_;
    bool singular_;
};

/// Exact solution of M x = rhs; throws SingularMatrix.
template <class T>
Vec<T> solve_linear(const Mat<T>& m, const Vec<T>& rhs) {
    return Lu<T>(m).solve(rhs);
}

template <class T>
T determinant(const Mat<T>& m) {
    return Lu<T>(m).det();
}

// ---------------------------------------------------------------------------
// Rank and kernel via row echelon form (exact).
// ---------------------------------------------------------------------------

/// Basis of the null space {v : M v = 0}.
template <class T>
std::vector<Vec<T>> kernel(Mat<T> m) {
    const int rows = m.rows(), cols = m.cols();
    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (sign(m(i, c)) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        if (piv != r)
            for (int j = 0; j < cols; ++j) std::swap(m(piv, j), m(r, j));
        T inv = T(1) / m(r, c);
        for (int j = c; j < cols; ++j) m(r, j) = m(r, j) * inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || sign(m(i, c)) == 0) continue;
            T f = m(i, c);
            for (int j = c; j < cols; ++j) m(i, j) = m(i, j) - f * m(r, j);
        }
        pivot_col.push_back(c);
        ++r;
    }
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    std::vector<Vec<T>> basis;
    for (int c = 0; c < cols; ++c) {
        if (is_pivot[c]) continue;
        Vec<T> v(cols, T(0));
        v[c] = T(1);
        for (int i = 0; i < (int)pivot_col.size(); ++i) v[pivot_col[i]] = T(0) - m(i, c);
        basis.push_back(std::move(v));
    }
    return basis;
}

template <class T>
int rank(const Mat<T>& m) {
    return m.cols() - static_cast<int>(kernel(m).size());
}

// ---------------------------------------------------------------------------
// PSD classification by symmetric diagonally-pivoted LDL.
// ---------------------------------------------------------------------------

enum class PsdKind { PositiveDefinite, PositiveSemidefiniteSingular, Indefinite };

template <class T>
struct PsdResult {
    PsdKind kind;
    int rank;                          // meaningful for PD / PSD-singular
    std::vector<Vec<T>> kernel_basis;  // nonempty only when PSD-singular
    bool is_psd() const { return kind != PsdKind::Indefinite; }
    bool is_pd() const { return kind == PsdKind::PositiveDefinite; }
};

/// Exact 3-way classification {PD, PSD-singular(rank, kernel), Indefinite}.
/// Note the contract labels *everything* that is not PSD as Indefinite,
/// including negative semidefinite matrices.
template <class T>
PsdResult<T> psd_status(const Mat<T>& m_in) {
    Mat<T> m = m_in;
    const int n = m.rows();
    std::vector<bool> active(n, true);
    int pivots = 0;
    for (;;) {
        int piv = -1;
        for (int i = 0; i < n; ++i)
            if (active[i] && sign(m(i, i)) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) {
            // all remaining diagonal entries are zero: PSD only if the whole
            // remaining block vanishes ([[0,a],[a,0]] is indefinite for a != 0)
            for (int i = 0; i < n; ++i) {
                if (!active[i]) continue;
                for (int j = 0; j < n; ++j)
                    if (active[j] && sign(m(i, j)) != 0)
                        return {PsdKind::Indefinite, -1, {}};
            }
            break;
        }
        if (sign(m(piv, piv)) < 0) return {PsdKind::Indefinite, -1, {}};
        ++pivots;
        T inv = T(1) / m(piv, piv);
        active[piv] = false;
        for (int i = 0; i < n; ++i) {
            if (!active[i] || sign(m(i, piv)) == 0) continue;
            T f = m(i, piv) * inv;
            for (int j = 0; j < n; ++j)
                if (active[j]) m(i, j) = m(i, j) - f * m(piv, j);
        }
        if (pivots == n) return {PsdKind::PositiveDefinite, n, {}};
    }
    return {PsdKind::PositiveSemidefiniteSingular, pivots, kernel(m_in)};
}

// ---------------------------------------------------------------------------
// Schur complement M/A = D - B^T A^{-1} B for the leading k x k block A.
// ---------------------------------------------------------------------------

template <class T>
Mat<T> schur_complement(const Mat<T>& m, int k) {
    const int n = m.rows();
    Mat<T> a = m.leading(k);
    Lu<T> lu(a);
    if (lu.singular()) throw SingularBlock();
    Mat<T> s(n - k, n - k);
    // columns of A^{-1} B, B = m[0..k, k..n]
    std::vector<Vec<T>> ainv_b;
    for (int j = k; j < n; ++j) ainv_b.push_back(lu.solve(m.column(j, k)));
    for (int i = k; i < n; ++i)
        for (int j = k; j < n; ++j) {
            T acc = m(i, j);
            for (int t = 0; t < k; ++t) acc = acc - m(i, t) * ainv_b[j - k][t];
            s(i - k, j - k) = acc;
        }
    return s;
}

/// Scalar Schur complement for an (k+1) x (k+1) bordered matrix.
template <class T>
T schur_scalar(const Mat<T>& m, int k) {
    Mat<T> s = schur_complement(m, k);
    if (s.rows() != 1) throw PreconditionViolated("schur_scalar wants a (k+1)x(k+1) matrix");
    return s(0, 0);
}

}  // namespace momcurve
