#ifndef ANISO_LINALG_HPP
#define ANISO_LINALG_HPP

#include "exact.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace aniso {

/// Signals a linearly dependent input basis (singular Gram matrix).
class dependent_basis : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

template <class T>
bool is_zero_value(const T& v)
{
    return v == T(0);
}

} // namespace detail

/// Reduced row echelon form over a field (Rational or ExactScalar).
/// Returns the pivot column of each nonzero row.
template <class T>
std::vector<std::size_t> rref_in_place(Matrix<T>& m)
{
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t sel = row;
        while (sel < m.rows() && detail::is_zero_value(m(sel, col)))
            ++sel;
        if (sel == m.rows())
            continue;
        if (sel != row)
            for (std::size_t j = 0; j < m.cols(); ++j)
                std::swap(m(sel, j), m(row, j));
        T inv = T(1) / m(row, col);
        for (std::size_t j = col; j < m.cols(); ++j)
            m(row, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == row || detail::is_zero_value(m(i, col)))
                continue;
            T f = m(i, col);
            for (std::size_t j = col; j < m.cols(); ++j)
                m(i, j) -= f * m(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

template <class T>
std::size_t rank(Matrix<T> m)
{
    return rref_in_place(m).size();
}

/// Basis (as columns) of the right null space {x : m x = 0} over the field.
template <class T>
Matrix<T> field_kernel(Matrix<T> m, std::size_t n_cols)
{
    if (m.rows() == 0)
        return Matrix<T>::identity(n_cols);
    auto pivots = rref_in_place(m);
    std::vector<bool> is_pivot(n_cols, false);
    for (auto p : pivots)
        is_pivot[p] = true;
    std::vector<std::vector<T>> basis;
    for (std::size_t free = 0; free < n_cols; ++free) {
        if (is_pivot[free])
            continue;
        std::vector<T> v(n_cols, T(0));
        v[free] = T(1);
        for (std::size_t r = 0; r < pivots.size(); ++r)
            v[pivots[r]] = -m(r, free);
        basis.push_back(std::move(v));
    }
    return Matrix<T>::from_columns(n_cols, basis);
}

/// Determinant by fraction-producing Gaussian elimination.
template <class T>
T determinant(Matrix<T> m)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("determinant: matrix not square");
    std::size_t n = m.rows();
    T det = T(1);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t sel = col;
        while (sel < n && detail::is_zero_value(m(sel, col)))
            ++sel;
        if (sel == n)
            return T(0);
        if (sel != col) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(m(sel, j), m(col, j));
            det = -det;
        }
        det *= m(col, col);
        T inv = T(1) / m(col, col);
        for (std::size_t i = col + 1; i < n; ++i) {
            if (detail::is_zero_value(m(i, col)))
                continue;
            T f = m(i, col) * inv;
            for (std::size_t j = col; j < n; ++j)
                m(i, j) -= f * m(col, j);
        }
    }
    return det;
}

/// Inverse over a field; nullopt when singular.
template <class T>
std::optional<Matrix<T>> inverse(const Matrix<T>& m)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("inverse: matrix not square");
    std::size_t n = m.rows();
    Matrix<T> aug = m.hcat(Matrix<T>::identity(n));
    auto pivots = rref_in_place(aug);
    if (pivots.size() < n || (n > 0 && pivots[n - 1] != n - 1))
        return std::nullopt;
    Matrix<T> inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            inv(i, j) = aug(i, n + j);
    return inv;
}

/// Result of a column-style Hermite normal form: H = M * U, U unimodular.
struct HermiteForm
{
    IntMatrix H;
    IntMatrix U;
    std::size_t rank = 0; ///< number of nonzero (leading) columns of H
};

/// Column Hermite normal form.
///
/// Convention: the nonzero columns of H come first and are in column
/// echelon form: column j has its pivot (first nonzero entry) in row
/// p_j with p_0 < p_1 < ...; pivots are positive; in a pivot row every
/// entry left of the pivot lies in [0, pivot). Entries above a pivot
/// are zero ("lower triangular").
inline HermiteForm hnf(const IntMatrix& m)
{
    if (m.rows() == 0 || m.cols() == 0)
        throw std::invalid_argument("hnf: empty matrix");
    std::size_t rows = m.rows(), cols = m.cols();
    IntMatrix h = m;
    IntMatrix u = IntMatrix::identity(cols);

    // column ops applied to both h and u
    auto col_axpy = [&](std::size_t dst, const Integer& f, std::size_t src) {
        for (std::size_t i = 0; i < rows; ++i)
            h(i, dst) += f * h(i, src);
        for (std::size_t i = 0; i < cols; ++i)
            u(i, dst) += f * u(i, src);
    };
    auto col_swap = [&](std::size_t a, std::size_t b) {
        for (std::size_t i = 0; i < rows; ++i)
            std::swap(h(i, a), h(i, b));
        for (std::size_t i = 0; i < cols; ++i)
            std::swap(u(i, a), u(i, b));
    };
    auto col_neg = [&](std::size_t a) {
        for (std::size_t i = 0; i < rows; ++i)
            h(i, a) = -h(i, a);
        for (std::size_t i = 0; i < cols; ++i)
            u(i, a) = -u(i, a);
    };
    // [a b] <- [a b] * [[x, -t/g], [y, s/g]] with s*x... unimodular 2x2 combine
    auto col_combine = [&](std::size_t a, std::size_t b, const Integer& x, const Integer& y,
                           const Integer& p, const Integer& q) {
        // new_a = x*a + y*b, new_b = p*a + q*b, with x*q - y*p = 1
        for (std::size_t i = 0; i < rows; ++i) {
            Integer na = x * h(i, a) + y * h(i, b);
            Integer nb = p * h(i, a) + q * h(i, b);
            h(i, a) = std::move(na);
            h(i, b) = std::move(nb);
        }
        for (std::size_t i = 0; i < cols; ++i) {
            Integer na = x * u(i, a) + y * u(i, b);
            Integer nb = p * u(i, a) + q * u(i, b);
            u(i, a) = std::move(na);
            u(i, b) = std::move(nb);
        }
    };

    std::size_t piv_col = 0;
    std::vector<std::size_t> pivot_rows;
    for (std::size_t r = 0; r < rows && piv_col < cols; ++r) {
        // clear row r in columns piv_col+1.. into column piv_col
        for (std::size_t j = piv_col + 1; j < cols; ++j) {
            if (h(r, j) == 0)
                continue;
            if (h(r, piv_col) == 0) {
                col_swap(piv_col, j);
                continue;
            }
            Integer a = h(r, piv_col), b = h(r, j), g, s, t;
            mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
            // new pivot column: s*a_col + t*b_col (entry g); new j: -(b/g) a_col + (a/g) b_col (entry 0)
            Integer bg = b / g, ag = a / g;
            col_combine(piv_col, j, s, t, Integer(-bg), ag);
        }
        if (h(r, piv_col) == 0)
            continue;
        if (h(r, piv_col) < 0)
            col_neg(piv_col);
        const Integer piv = h(r, piv_col);
        for (std::size_t j = 0; j < piv_col; ++j) {
            Integer qf;
            mpz_fdiv_q(qf.get_mpz_t(), h(r, j).get_mpz_t(), piv.get_mpz_t());
            if (qf != 0)
                col_axpy(j, Integer(-qf), piv_col);
        }
        pivot_rows.push_back(r);
        ++piv_col;
    }
    return HermiteForm{std::move(h), std::move(u), piv_col};
}

/// Clears denominators row by row (each row scaled by the lcm of its denominators).
inline IntMatrix clear_row_denominators(const RationalMatrix& m)
{
    IntMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Integer l = 1;
        for (std::size_t j = 0; j < m.cols(); ++j)
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m(i, j).get_den_mpz_t());
        for (std::size_t j = 0; j < m.cols(); ++j) {
            Rational v = m(i, j) * l;
            r(i, j) = v.get_num();
        }
    }
    return r;
}

/// Lattice basis (columns) of {k in Z^n : e k = 0} for an integer matrix e.
inline IntMatrix integer_kernel_of(const IntMatrix& e, std::size_t n)
{
    IntMatrix basis;
    if (e.rows() == 0) {
        basis = IntMatrix::identity(n);
    } else {
        auto hf = hnf(e);
        basis = IntMatrix(n, n - hf.rank);
        for (std::size_t j = hf.rank; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                basis(i, j - hf.rank) = hf.U(i, j);
    }
    if (basis.cols() == 0)
        return IntMatrix(n, 0);
    // canonical representative of the same lattice
    auto canon = hnf(basis);
    IntMatrix out(n, canon.rank);
    for (std::size_t j = 0; j < canon.rank; ++j)
        for (std::size_t i = 0; i < n; ++i)
            out(i, j) = canon.H(i, j);
    return out;
}

/// Integer points of the null space of m over Q(sqrt d).
///
/// m k = 0 with k integral splits into the rational-part and surd-part
/// systems; their stacked integer kernel is saturated by construction.
inline IntMatrix integer_kernel(const ExactMatrix& m)
{
    std::size_t n = m.cols();
    RationalMatrix split(2 * m.rows(), n);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < n; ++j) {
            split(i, j) = m(i, j).rational_part();
            split(m.rows() + i, j) = m(i, j).surd_part();
        }
    return integer_kernel_of(clear_row_denominators(split), n);
}

/// Z^n intersected with the rational span of the columns of b.
inline IntMatrix saturate(const IntMatrix& b)
{
    std::size_t n = b.rows();
    if (b.cols() == 0)
        return IntMatrix(n, 0);
    IntMatrix complement = integer_kernel_of(b.transpose(), n); // span(b)^perp
    return integer_kernel_of(complement.transpose(), n);
}

/// B^T B computed exactly.
template <class T>
ExactMatrix gram(const Matrix<T>& b)
{
    ExactMatrix g(b.cols(), b.cols());
    for (std::size_t i = 0; i < b.cols(); ++i)
        for (std::size_t j = i; j < b.cols(); ++j) {
            ExactScalar s;
            for (std::size_t k = 0; k < b.rows(); ++k)
                s += ExactScalar(b(k, i)) * ExactScalar(b(k, j));
            g(i, j) = s;
            g(j, i) = s;
        }
    return g;
}

inline RationalMatrix rational_gram(const IntMatrix& b)
{
    RationalMatrix g(b.cols(), b.cols());
    for (std::size_t i = 0; i < b.cols(); ++i)
        for (std::size_t j = i; j < b.cols(); ++j) {
            Integer s = 0;
            for (std::size_t k = 0; k < b.rows(); ++k)
                s += b(k, i) * b(k, j);
            g(i, j) = Rational(s);
            g(j, i) = Rational(s);
        }
    return g;
}

/// Dual basis B (B^T B)^{-1}: columns lie in span(B) and pair to delta_ij with B.
inline RationalMatrix dual_basis(const IntMatrix& b)
{
    if (b.cols() == 0)
        return RationalMatrix(b.rows(), 0);
    auto ginv = inverse(rational_gram(b));
    if (!ginv)
        throw dependent_basis("dual_basis: columns are linearly dependent");
    return to_rational(b) * *ginv;
}

/// det(B^T B); 1 for an empty basis (trivial lattice has unit covolume).
inline Rational covolume_sq(const IntMatrix& b)
{
    if (b.cols() == 0)
        return Rational(1);
    return determinant(rational_gram(b));
}

} // namespace aniso

#endif
