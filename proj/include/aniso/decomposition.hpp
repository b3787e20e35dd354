#ifndef ANISO_DECOMPOSITION_HPP
#define ANISO_DECOMPOSITION_HPP

#include "enumerate.hpp"
#include "exact.hpp"
#include "linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

/// A p-dimensional subspace F of R^n given by p column vectors over Q(sqrt d).
struct SubspaceSpec
{
    std::size_t n = 0;
    ExactMatrix f_basis; ///< n x p, columns span F; p = 0 allowed
    long discriminant = 0;

    static SubspaceSpec from_vectors(std::size_t n, const std::vector<ExactVector>& vectors)
    {
        SubspaceSpec s;
        s.n = n;
        s.f_basis = vectors.empty() ? ExactMatrix(n, 0) : ExactMatrix::from_columns(n, vectors);
        s.discriminant = s.f_basis.cols() ? discriminant_of(s.f_basis) : 0;
        return s;
    }
    static SubspaceSpec trivial(std::size_t n) { return from_vectors(n, {}); }
};

/// Coordinates of a dual point in the dual basis of Gamma.
using DualCoords = std::vector<std::int64_t>;

/// The full splitting of R^n attached to F: H = F^perp, the lattice
/// Gamma = Z^n cap F of rank r, V = span(Gamma), V^perp, F_V = F cap V^perp,
/// Gamma^perp = Z^n cap V^perp, the dual lattices, and the projections.
///
/// Built once by decompose() and read-only afterwards.
struct Decomposition
{
    std::size_t n = 0, p = 0, q = 0, r = 0;
    long discriminant = 0;

    ExactMatrix f_basis;               // n x p
    ExactMatrix h_basis;               // n x q
    IntMatrix gamma_basis;             // n x r, also a basis of V
    RationalMatrix vperp_rational_basis; // n x (n-r)
    ExactMatrix fv_basis;              // n x (p-r)
    IntMatrix gamma_perp_basis;        // n x (n-r)
    RationalMatrix gamma_star_basis;   // n x r
    RationalMatrix gamma_perp_star_basis; // n x (n-r)
    Rational covol_sq{1};
    RationalMatrix gamma_star_gram;    // r x r, Gram of the dual basis

    RationalMatrix proj_v;
    ExactMatrix proj_f;
    ExactMatrix proj_h;

    // double mirrors
    Eigen::MatrixXd proj_v_f, proj_f_f, proj_h_f;
    Eigen::MatrixXd frame_f, frame_h, frame_v, frame_vperp; // orthonormal columns
    Eigen::MatrixXd gamma_star_f;                            // n x r
    std::vector<std::int64_t> gamma_rows;                    // r x n, Gamma^T as int64

    double covolume() const { return std::sqrt(covol_sq.get_d()); }
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const ExactMatrix& m)
{
    Eigen::MatrixXd r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(i, j) = m(i, j).to_double();
    return r;
}
inline Eigen::MatrixXd to_eigen(const RationalMatrix& m)
{
    Eigen::MatrixXd r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(i, j) = m(i, j).get_d();
    return r;
}
inline Eigen::MatrixXd to_eigen(const IntMatrix& m) { return to_eigen(to_rational(m)); }

/// Orthonormal basis of the column span (columns assumed independent).
inline Eigen::MatrixXd orthonormal_frame(const Eigen::MatrixXd& b)
{
    if (b.cols() == 0)
        return Eigen::MatrixXd(b.rows(), 0);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.cols());
    return q;
}

/// Orthogonal projection onto span(b) over the field of b's entries.
template <class T>
Matrix<T> projection_onto(const Matrix<T>& b)
{
    std::size_t n = b.rows();
    if (b.cols() == 0)
        return Matrix<T>(n, n);
    Matrix<T> g = b.transpose() * b;
    auto ginv = inverse(g);
    if (!ginv)
        throw dependent_basis("projection_onto: dependent basis");
    return b * *ginv * b.transpose();
}

} // namespace detail

/// Builds every piece of the splitting from F. Throws dependent_basis when
/// the spanning vectors of F are not independent.
inline Decomposition decompose(const SubspaceSpec& spec)
{
    const std::size_t n = spec.n;
    if (n == 0)
        throw std::invalid_argument("decompose: ambient dimension must be positive");
    if (spec.f_basis.rows() != n && spec.f_basis.cols() != 0)
        throw std::invalid_argument("decompose: basis vectors must have length n");
    Decomposition dec;
    dec.n = n;
    dec.f_basis = spec.f_basis.cols() ? spec.f_basis : ExactMatrix(n, 0);
    dec.p = dec.f_basis.cols();
    if (dec.p > n)
        throw std::invalid_argument("decompose: more than n spanning vectors");
    if (dec.p && rank(dec.f_basis) != dec.p)
        throw dependent_basis("decompose: the vectors spanning F are linearly dependent");
    dec.q = n - dec.p;
    dec.discriminant = dec.p ? discriminant_of(dec.f_basis) : 0;

    // H = F^perp as the kernel of the inner products with F's basis
    dec.h_basis = dec.p ? field_kernel(dec.f_basis.transpose(), n) : ExactMatrix::identity(n);

    // Gamma = Z^n cap F: integer solutions of (h_j, k) = 0
    if (dec.q == 0)
        dec.gamma_basis = IntMatrix::identity(n);
    else if (dec.p == 0)
        dec.gamma_basis = IntMatrix(n, 0);
    else
        dec.gamma_basis = integer_kernel(dec.h_basis.transpose());
    dec.r = dec.gamma_basis.cols();

    // V^perp and Gamma^perp (V is rational, so is V^perp)
    if (dec.r == 0) {
        dec.vperp_rational_basis = RationalMatrix::identity(n);
        dec.gamma_perp_basis = IntMatrix::identity(n);
    } else {
        RationalMatrix gt = to_rational(dec.gamma_basis).transpose();
        dec.vperp_rational_basis = dec.r == n ? RationalMatrix(n, 0) : field_kernel(gt, n);
        dec.gamma_perp_basis = dec.r == n ? IntMatrix(n, 0) : integer_kernel_of(dec.gamma_basis.transpose(), n);
    }

    // F_V = F cap V^perp: kernel of [H^T; Gamma^T]
    if (dec.p == 0) {
        dec.fv_basis = ExactMatrix(n, 0);
    } else {
        ExactMatrix eqs = dec.q ? dec.h_basis.transpose() : ExactMatrix(0, n);
        if (dec.r)
            eqs = eqs.vcat(to_exact(dec.gamma_basis.transpose()));
        dec.fv_basis = eqs.rows() ? field_kernel(eqs, n) : ExactMatrix::identity(n);
    }

    dec.gamma_star_basis = dual_basis(dec.gamma_basis);
    dec.gamma_perp_star_basis = dual_basis(dec.gamma_perp_basis);
    dec.covol_sq = covolume_sq(dec.gamma_basis);
    if (dec.r) {
        auto ginv = inverse(rational_gram(dec.gamma_basis));
        dec.gamma_star_gram = *ginv;
    }

    dec.proj_v = detail::projection_onto(to_rational(dec.gamma_basis));
    dec.proj_f = detail::projection_onto(dec.f_basis);
    dec.proj_h = ExactMatrix::identity(n) - dec.proj_f;

    dec.proj_v_f = detail::to_eigen(dec.proj_v);
    dec.proj_f_f = detail::to_eigen(dec.proj_f);
    dec.proj_h_f = detail::to_eigen(dec.proj_h);
    dec.frame_f = detail::orthonormal_frame(detail::to_eigen(dec.f_basis));
    dec.frame_h = detail::orthonormal_frame(detail::to_eigen(dec.h_basis));
    dec.frame_v = detail::orthonormal_frame(detail::to_eigen(dec.gamma_basis));
    dec.frame_vperp = detail::orthonormal_frame(detail::to_eigen(dec.vperp_rational_basis));
    dec.gamma_star_f = detail::to_eigen(dec.gamma_star_basis);

    dec.gamma_rows.resize(dec.r * n);
    for (std::size_t j = 0; j < dec.r; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const Integer& v = dec.gamma_basis(i, j);
            if (!v.fits_slong_p())
                throw std::overflow_error("decompose: lattice basis entry exceeds 64 bits");
            dec.gamma_rows[j * n + i] = v.get_si();
        }
    return dec;
}

/// pi_V(k) in dual-basis coordinates: since pi_V(k) = sum_i (k, gamma_i) gamma*_i,
/// the coordinates are the integers (k, gamma_i).
inline DualCoords classify_fiber(const Decomposition& dec, std::span<const std::int64_t> k)
{
    if (k.size() != dec.n)
        throw std::invalid_argument("classify_fiber: dimension mismatch");
    DualCoords c(dec.r, 0);
    for (std::size_t j = 0; j < dec.r; ++j) {
        std::int64_t s = 0;
        for (std::size_t i = 0; i < dec.n; ++i)
            s += dec.gamma_rows[j * dec.n + i] * k[i];
        c[j] = s;
    }
    return c;
}

/// The dual point with the given coordinates, exactly.
inline std::vector<Rational> dual_point(const Decomposition& dec, const DualCoords& coords)
{
    if (coords.size() != dec.r)
        throw std::invalid_argument("dual_point: coordinate count must equal r");
    std::vector<Rational> v(dec.n, Rational(0));
    for (std::size_t j = 0; j < dec.r; ++j)
        for (std::size_t i = 0; i < dec.n; ++i)
            v[i] += dec.gamma_star_basis(i, j) * coords[j];
    return v;
}

inline Eigen::VectorXd dual_point_f(const Decomposition& dec, const DualCoords& coords)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dec.n));
    for (std::size_t j = 0; j < dec.r; ++j)
        v += dec.gamma_star_f.col(static_cast<Eigen::Index>(j)) * static_cast<double>(coords[j]);
    return v;
}

/// Exact squared length of a dual point: m^T (Gamma^T Gamma)^{-1} m.
inline Rational dual_norm_sq(const Decomposition& dec, const DualCoords& m)
{
    Rational s = 0;
    for (std::size_t i = 0; i < dec.r; ++i)
        for (std::size_t j = 0; j < dec.r; ++j)
            s += dec.gamma_star_gram(i, j) * m[i] * m[j];
    return s;
}

/// All gamma* in Gamma* with |gamma*| <= radius, in lexicographic coordinate order.
inline std::vector<DualCoords> enumerate_dual_points(const Decomposition& dec, double radius)
{
    if (!(radius >= 0))
        throw std::invalid_argument("enumerate_dual_points: radius must be nonnegative");
    if (dec.r == 0)
        return {DualCoords{}};
    const std::size_t r = dec.r;
    std::vector<double> g(r * r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j)
            g[i * r + j] = dec.gamma_star_gram(i, j).get_d();
    const Rational bound_exact = rational_from_double(radius) * rational_from_double(radius);
    const double bound = radius * radius;
    // widen the float bound a little; the exact test below decides
    RowEnumerator en(PrefixForm(g, r), std::vector<double>(r, 0.0), bound * (1 + 1e-9) + 1e-12);
    std::vector<DualCoords> out;
    en.visit_all([&](const Row& row) {
        double w = std::sqrt(std::max(row.half_width_sq, 0.0));
        auto lo = detail::checked_floor(row.center - w) - 1;
        auto hi = detail::checked_ceil(row.center + w) + 1;
        DualCoords m(row.prefix.begin(), row.prefix.end());
        m.push_back(0);
        for (auto t = lo; t <= hi; ++t) {
            m.back() = t;
            if (dual_norm_sq(dec, m) <= bound_exact)
                out.push_back(m);
        }
    });
    std::sort(out.begin(), out.end());
    return out;
}

/// Human-readable summary of a decomposition; deterministic.
inline std::string decomposition_report(const Decomposition& dec)
{
    std::ostringstream os;
    os << "n = " << dec.n << "\n";
    os << "p = " << dec.p << "\n";
    os << "q = " << dec.q << "\n";
    os << "r = " << dec.r << "\n";
    os << "discriminant = " << dec.discriminant << "\n";
    os << "F basis (columns) = " << to_string(dec.f_basis) << "\n";
    os << "H basis (columns) = " << to_string(dec.h_basis) << "\n";
    os << "Gamma basis (columns) = " << to_string(dec.gamma_basis) << "\n";
    os << "V-perp basis (columns) = " << to_string(dec.vperp_rational_basis) << "\n";
    os << "F_V basis (columns) = " << to_string(dec.fv_basis) << "\n";
    os << "Gamma-perp basis (columns) = " << to_string(dec.gamma_perp_basis) << "\n";
    os << "Gamma* basis (columns) = " << to_string(dec.gamma_star_basis) << "\n";
    os << "Gamma-perp* basis (columns) = " << to_string(dec.gamma_perp_star_basis) << "\n";
    os << "covol_sq(Gamma) = " << dec.covol_sq.get_str() << "\n";
    Rational perp = covolume_sq(dec.gamma_perp_basis);
    os << "covol_sq(Gamma-perp) = " << perp.get_str() << "\n";
    os << "covolume identity holds = " << (perp == dec.covol_sq ? "true" : "false") << "\n";
    return os.str();
}

} // namespace aniso

#endif
