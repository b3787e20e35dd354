#ifndef ANISO_ENUMERATE_HPP
#define ANISO_ENUMERATE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace aniso {

/// Raised when a quadratic form that must be positive definite is not.
class geometry_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Prefix-first factorization of a symmetric positive-definite form:
///
///     (y)^T G y = sum_j diag[j] * (y_j + sum_{i<j} mu(j,i) y_i)^2
///
/// so that fixing y_0..y_{j-1} leaves a one-dimensional condition on y_j.
/// This is the Fincke-Pohst ordering with the first coordinate outermost.
class PrefixForm
{
public:
    PrefixForm() = default;

    /// g is row-major n x n.
    PrefixForm(std::span<const double> g, std::size_t n) : n_(n), diag_(n), mu_(n * n, 0.0)
    {
        if (g.size() != n * n)
            throw std::invalid_argument("PrefixForm: shape mismatch");
        // LDL^T of the index-reversed matrix
        auto gr = [&](std::size_t a, std::size_t b) { return g[(n - 1 - a) * n + (n - 1 - b)]; };
        std::vector<double> l(n * n, 0.0), dd(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            double s = gr(j, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= l[j * n + k] * l[j * n + k] * dd[k];
            if (!(s > 0.0))
                throw geometry_error("quadratic form is not positive definite");
            dd[j] = s;
            l[j * n + j] = 1.0;
            for (std::size_t i = j + 1; i < n; ++i) {
                double t = gr(i, j);
                for (std::size_t k = 0; k < j; ++k)
                    t -= l[i * n + k] * l[j * n + k] * dd[k];
                l[i * n + j] = t / s;
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            diag_[j] = dd[n - 1 - j];
            for (std::size_t i = 0; i < j; ++i)
                mu_[j * n + i] = l[(n - 1 - i) * n + (n - 1 - j)];
        }
    }

    std::size_t dim() const { return n_; }
    double diag(std::size_t j) const { return diag_[j]; }
    double mu(std::size_t j, std::size_t i) const { return mu_[j * n_ + i]; }

private:
    std::size_t n_ = 0;
    std::vector<double> diag_;
    std::vector<double> mu_;
};

/// One innermost row handed to a row visitor: the first n-1 coordinates
/// are fixed, and the real interval (center +- sqrt(half_width_sq)) is a
/// floating-point estimate of where the last coordinate may lie.
struct Row
{
    std::span<const std::int64_t> prefix;
    double center = 0.0;
    double half_width_sq = 0.0;
};

namespace detail {

inline std::int64_t checked_floor(double x)
{
    if (!(std::fabs(x) < 4.0e18))
        throw std::overflow_error("enumeration range exceeds 64-bit coordinates");
    return static_cast<std::int64_t>(std::floor(x));
}

inline std::int64_t checked_ceil(double x)
{
    if (!(std::fabs(x) < 4.0e18))
        throw std::overflow_error("enumeration range exceeds 64-bit coordinates");
    return static_cast<std::int64_t>(std::ceil(x));
}

} // namespace detail

/// Depth-first enumeration of the integer rows of {k : (k-c)^T G (k-c) < bound}.
///
/// Outer coordinates are scanned over float intervals widened by a small
/// margin, so the visited rows are a superset of the true ones; the row
/// visitor decides membership for the last coordinate.
class RowEnumerator
{
public:
    RowEnumerator(PrefixForm form, std::vector<double> center, double bound)
        : form_(std::move(form)), center_(std::move(center)), bound_(bound)
    {
        if (center_.size() != form_.dim())
            throw std::invalid_argument("RowEnumerator: center dimension mismatch");
    }

    std::size_t dim() const { return form_.dim(); }

    /// Integer range of the outermost coordinate (inclusive). Empty when lo > hi.
    std::pair<std::int64_t, std::int64_t> outer_range() const
    {
        if (dim() == 1)
            return {0, 0};
        double w2 = bound_ / form_.diag(0);
        if (w2 < 0)
            return {1, 0};
        double w = std::sqrt(w2);
        double m = margin(center_[0], w);
        return {detail::checked_floor(center_[0] - w - m), detail::checked_ceil(center_[0] + w + m)};
    }

    /// Visits all rows whose outermost coordinate lies in [lo, hi].
    /// In one dimension there is exactly one row with an empty prefix.
    template <class Visitor>
    void visit(std::int64_t lo, std::int64_t hi, Visitor&& visitor) const
    {
        std::size_t n = dim();
        std::vector<std::int64_t> k(n, 0);
        std::vector<double> y(n, 0.0);
        if (n == 1) {
            visitor(Row{std::span<const std::int64_t>(), center_[0], bound_ / form_.diag(0)});
            return;
        }
        for (std::int64_t k0 = lo; k0 <= hi; ++k0) {
            k[0] = k0;
            y[0] = static_cast<double>(k0) - center_[0];
            double partial = form_.diag(0) * y[0] * y[0];
            descend(1, partial, k, y, visitor);
        }
    }

    template <class Visitor>
    void visit_all(Visitor&& visitor) const
    {
        auto [lo, hi] = outer_range();
        visit(lo, hi, visitor);
    }

private:
    static double margin(double center, double w) { return 1e-7 * (1.0 + std::fabs(center) + w) + 1e-9; }

    template <class Visitor>
    void descend(std::size_t j, double partial, std::vector<std::int64_t>& k, std::vector<double>& y,
                 Visitor& visitor) const
    {
        std::size_t n = dim();
        double rem = bound_ - partial;
        if (rem < -1e-7 * (1.0 + bound_))
            return;
        double s = 0.0;
        for (std::size_t i = 0; i < j; ++i)
            s += form_.mu(j, i) * y[i];
        double t_center = center_[j] - s;
        double w2 = rem / form_.diag(j);
        if (j + 1 == n) {
            visitor(Row{std::span<const std::int64_t>(k.data(), n - 1), t_center, w2});
            return;
        }
        double w = std::sqrt(std::max(w2, 0.0));
        double m = margin(t_center, w);
        std::int64_t lo = detail::checked_floor(t_center - w - m);
        std::int64_t hi = detail::checked_ceil(t_center + w + m);
        for (std::int64_t kj = lo; kj <= hi; ++kj) {
            k[j] = kj;
            y[j] = static_cast<double>(kj) - center_[j];
            double z = y[j] + s;
            descend(j + 1, partial + form_.diag(j) * z * z, k, y, visitor);
        }
    }

    PrefixForm form_;
    std::vector<double> center_;
    double bound_;
};

/// Resolves the exact integer interval of one row, given a membership
/// predicate that is monotone toward the row's interior (the body's
/// intersection with the row is an interval). Returns [lo, hi], empty if lo > hi.
template <class Inside>
std::pair<std::int64_t, std::int64_t> resolve_row(const Row& row, Inside&& inside)
{
    double w = std::sqrt(std::max(row.half_width_sq, 0.0));
    std::int64_t lo = detail::checked_floor(row.center - w) + 1;
    std::int64_t hi = detail::checked_ceil(row.center + w) - 1;
    if (lo > hi) {
        // float says empty or nearly so; probe the integers around the center
        std::int64_t a = detail::checked_floor(row.center), b = a + 1;
        if (inside(a))
            lo = hi = a;
        else if (inside(b))
            lo = hi = b;
        else
            return {1, 0};
        while (inside(lo - 1))
            --lo;
        while (inside(hi + 1))
            ++hi;
        return {lo, hi};
    }
    if (inside(lo - 1)) {
        do
            --lo;
        while (inside(lo - 1));
    } else {
        while (lo <= hi && !inside(lo))
            ++lo;
    }
    if (lo > hi) {
        // the float interval held no interior point at all
        return {1, 0};
    }
    if (inside(hi + 1)) {
        do
            ++hi;
        while (inside(hi + 1));
    } else {
        while (hi >= lo && !inside(hi))
            --hi;
    }
    return {lo, hi};
}

} // namespace aniso

#endif
