#ifndef ANISO_DOMAIN_HPP
#define ANISO_DOMAIN_HPP

#include "enumerate.hpp"
#include "exact.hpp"
#include "linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace aniso {

enum class Membership { inside, outside, boundary_indeterminate };
enum class EvalMode { exact, floating };

/// Half-width of the band around the level set where float membership is not trusted.
inline constexpr double kGuardBand = 1e-9;

/// Raised when exact evaluation is requested for data that is not exact.
class mode_unavailable : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

struct Ball
{
    ExactVector center;
    ExactScalar radius_sq;
};

/// {x : (x - c)^T Q (x - c) < 1}
struct Ellipsoid
{
    ExactVector center;
    ExactMatrix quad;
};

/// {x : sum_i ((x - c)_i / r)^p < 1}, p even
struct LpBall
{
    ExactVector center;
    ExactScalar radius;
    int exponent = 2;
};

using Shape = std::variant<Ball, Ellipsoid, LpBall>;

/// Exact world-frame quadric {x : (x - c)^T M (x - c) < 1}.
struct ExactQuadric
{
    ExactMatrix m;
    ExactVector c;
};

/// Double-precision world-frame quadric.
struct FloatQuadric
{
    Eigen::MatrixXd m;
    Eigen::VectorXd c;
};

/// An (n - r)-plane through `base` spanned by the orthonormal columns of `directions`.
struct AffineSlice
{
    Eigen::VectorXd base;
    Eigen::MatrixXd directions;
};

struct VolumeEstimate
{
    double value = 0.0;
    double error = 0.0; ///< one standard error; 0 for closed forms
};

/// Volume of the unit ball in R^m.
inline double unit_ball_volume(std::size_t m)
{
    double h = static_cast<double>(m) / 2.0;
    return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

namespace detail {

inline Eigen::VectorXd to_eigen(const ExactVector& v)
{
    Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        r(static_cast<Eigen::Index>(i)) = v[i].to_double();
    return r;
}

inline Eigen::MatrixXd to_eigen_m(const ExactMatrix& m)
{
    Eigen::MatrixXd r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(i, j) = m(i, j).to_double();
    return r;
}

inline bool is_identity(const ExactMatrix& m)
{
    return m == ExactMatrix::identity(m.rows());
}

inline ExactScalar pow_int(ExactScalar x, int e)
{
    ExactScalar r(1);
    while (e > 0) {
        if (e & 1)
            r *= x;
        x *= x;
        e >>= 1;
    }
    return r;
}

inline double orthogonality_defect(const Eigen::MatrixXd& r)
{
    Eigen::MatrixXd d = r.transpose() * r - Eigen::MatrixXd::Identity(r.rows(), r.cols());
    return d.cwiseAbs().maxCoeff();
}

} // namespace detail

/// A bounded open body: a base shape placed by a rigid motion x0 -> R x0 + t.
class Domain
{
public:
    static Domain ball(ExactVector center, ExactScalar radius_sq)
    {
        if (radius_sq.sign() <= 0)
            throw std::invalid_argument("ball: radius must be positive");
        return Domain(Ball{std::move(center), std::move(radius_sq)});
    }
    static Domain ellipsoid(ExactVector center, ExactMatrix quad)
    {
        std::size_t n = center.size();
        if (quad.rows() != n || quad.cols() != n)
            throw std::invalid_argument("ellipsoid: quad must be n x n");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (quad(i, j) != quad(j, i))
                    throw std::invalid_argument("ellipsoid: quad must be symmetric");
        // pivoted LDL^T in exact arithmetic: positive pivots <=> positive definite
        ExactMatrix a = quad;
        for (std::size_t k = 0; k < n; ++k) {
            if (a(k, k).sign() <= 0)
                throw std::invalid_argument("ellipsoid: quad must be positive definite");
            for (std::size_t i = k + 1; i < n; ++i) {
                ExactScalar f = a(i, k) / a(k, k);
                for (std::size_t j = k; j < n; ++j)
                    a(i, j) -= f * a(k, j);
            }
        }
        return Domain(Ellipsoid{std::move(center), std::move(quad)});
    }
    static Domain lp_ball(ExactVector center, ExactScalar radius, int exponent)
    {
        if (radius.sign() <= 0)
            throw std::invalid_argument("lp_ball: radius must be positive");
        if (exponent < 2 || exponent % 2 != 0)
            throw std::invalid_argument("lp_ball: exponent must be an even integer >= 2");
        return Domain(LpBall{std::move(center), std::move(radius), exponent});
    }

    const Shape& shape() const { return shape_; }
    std::size_t dim() const { return n_; }
    std::string shape_name() const
    {
        return std::visit(
            [](const auto& s) -> std::string {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Ball>)
                    return "ball";
                else if constexpr (std::is_same_v<S, Ellipsoid>)
                    return "ellipsoid";
                else
                    return "lpball";
            },
            shape_);
    }
    bool is_quadric() const { return !std::holds_alternative<LpBall>(shape_); }

    const Eigen::MatrixXd& rotation() const { return rot_f_; }
    const Eigen::VectorXd& translation() const { return trans_f_; }
    const std::optional<ExactMatrix>& exact_rotation() const { return rot_x_; }
    const std::optional<ExactVector>& exact_translation() const { return trans_x_; }

    /// Whether membership can be decided in exact arithmetic.
    bool exact_available() const
    {
        if (!trans_x_)
            return false;
        if (rot_x_)
            return true;
        if (const auto* b = std::get_if<Ball>(&shape_)) {
            for (const auto& v : b->center)
                if (!v.is_zero())
                    return false;
            return true;
        }
        return false;
    }

    /// Composes the pose with a rotation acting on R^n: returns R(this).
    Domain rotated(const Eigen::MatrixXd& r) const
    {
        check_rotation(r);
        Domain d = *this;
        d.rot_f_ = r * rot_f_;
        d.trans_f_ = r * trans_f_;
        d.rot_x_.reset();
        if (!(trans_x_ && is_zero_vector(*trans_x_)))
            d.trans_x_.reset();
        return d;
    }
    /// Exact rotation (rational orthogonal matrix, e.g. from Pythagorean triples).
    Domain rotated(const ExactMatrix& r) const
    {
        if (r.rows() != n_ || r.cols() != n_)
            throw std::invalid_argument("rotation: dimension mismatch");
        if (!(r.transpose() * r == ExactMatrix::identity(n_)) || determinant(r) != ExactScalar(1))
            throw std::invalid_argument("rotation: matrix is not in SO(n)");
        Domain d = rotated(detail::to_eigen_m(r));
        if (rot_x_)
            d.rot_x_ = r * *rot_x_;
        if (trans_x_)
            d.trans_x_ = r.apply(*trans_x_);
        return d;
    }
    Domain translated(const ExactVector& v) const
    {
        if (v.size() != n_)
            throw std::invalid_argument("translation: dimension mismatch");
        Domain d = *this;
        d.trans_f_ += detail::to_eigen(v);
        if (trans_x_) {
            for (std::size_t i = 0; i < n_; ++i)
                (*d.trans_x_)[i] += v[i];
        }
        return d;
    }

    /// World-frame center R c0 + t.
    Eigen::VectorXd world_center_f() const { return rot_f_ * detail::to_eigen(base_center()) + trans_f_; }
    ExactVector world_center_exact() const
    {
        require_exact();
        ExactVector c = base_center();
        if (rot_x_)
            c = rot_x_->apply(c);
        for (std::size_t i = 0; i < n_; ++i)
            c[i] += (*trans_x_)[i];
        return c;
    }

    /// Radius of a sphere about world_center_f() containing the closure.
    double outer_radius() const
    {
        return std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Ball>) {
                    return std::sqrt(s.radius_sq.to_double());
                } else if constexpr (std::is_same_v<S, Ellipsoid>) {
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::to_eigen_m(s.quad));
                    return (1.0 + 1e-9) / std::sqrt(es.eigenvalues().minCoeff());
                } else {
                    double e = 0.5 - 1.0 / s.exponent;
                    return (1.0 + 1e-12) * s.radius.to_double() * std::pow(static_cast<double>(n_), e);
                }
            },
            shape_);
    }

    /// Quadric data for Ball/Ellipsoid; for LpBall, its bounding ball.
    FloatQuadric world_quadric_f() const
    {
        FloatQuadric q;
        q.c = world_center_f();
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Ellipsoid>) {
                    q.m = rot_f_ * detail::to_eigen_m(s.quad) * rot_f_.transpose();
                    q.m = 0.5 * (q.m + q.m.transpose());
                } else {
                    double rr = std::is_same_v<S, Ball> ? 1.0 / std::get<Ball>(shape_).radius_sq.to_double()
                                                        : 1.0 / (outer_radius() * outer_radius());
                    q.m = rr * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
                }
            },
            shape_);
        return q;
    }

    /// Exact world-frame quadric (Ball/Ellipsoid only).
    ExactQuadric world_quadric_exact() const
    {
        require_exact();
        ExactQuadric q;
        q.c = world_center_exact();
        if (const auto* b = std::get_if<Ball>(&shape_)) {
            q.m = b->radius_sq.inverse() * ExactMatrix::identity(n_);
        } else if (const auto* e = std::get_if<Ellipsoid>(&shape_)) {
            q.m = rot_x_ ? *rot_x_ * e->quad * rot_x_->transpose() : e->quad;
        } else {
            throw std::logic_error("world_quadric_exact: LpBall is not a quadric");
        }
        return q;
    }

    /// Defining functional g with S = {g < 1}; double precision.
    double functional(const Eigen::VectorXd& x) const
    {
        return std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, LpBall>) {
                    Eigen::VectorXd u = rot_f_.transpose() * (x - trans_f_) - detail::to_eigen(s.center);
                    double r = s.radius.to_double(), acc = 0.0;
                    for (Eigen::Index i = 0; i < u.size(); ++i)
                        acc += std::pow(u(i) / r, s.exponent);
                    return acc;
                } else {
                    FloatQuadric q = world_quadric_f();
                    Eigen::VectorXd y = x - q.c;
                    return y.dot(q.m * y);
                }
            },
            shape_);
    }

    /// Exact functional value.
    ExactScalar functional_exact(const ExactVector& x) const
    {
        require_exact();
        if (x.size() != n_)
            throw std::invalid_argument("functional: dimension mismatch");
        if (const auto* lp = std::get_if<LpBall>(&shape_)) {
            ExactVector y(n_);
            for (std::size_t i = 0; i < n_; ++i)
                y[i] = x[i] - (*trans_x_)[i];
            ExactVector u = rot_x_ ? rot_x_->transpose().apply(y) : y;
            ExactScalar acc, rp = detail::pow_int(lp->radius, lp->exponent);
            for (std::size_t i = 0; i < n_; ++i)
                acc += detail::pow_int(u[i] - lp->center[i], lp->exponent);
            return acc / rp;
        }
        ExactQuadric q = world_quadric_exact();
        ExactScalar acc;
        ExactVector y(n_);
        for (std::size_t i = 0; i < n_; ++i)
            y[i] = x[i] - q.c[i];
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                acc += q.m(i, j) * y[i] * y[j];
        return acc;
    }

private:
    explicit Domain(Shape s) : shape_(std::move(s))
    {
        n_ = std::visit([](const auto& sh) { return sh.center.size(); }, shape_);
        if (n_ == 0)
            throw std::invalid_argument("domain: dimension must be positive");
        auto nn = static_cast<Eigen::Index>(n_);
        rot_f_ = Eigen::MatrixXd::Identity(nn, nn);
        trans_f_ = Eigen::VectorXd::Zero(nn);
        rot_x_ = ExactMatrix::identity(n_);
        trans_x_ = ExactVector(n_, ExactScalar(0));
    }

    const ExactVector& base_center() const
    {
        return std::visit([](const auto& sh) -> const ExactVector& { return sh.center; }, shape_);
    }
    void require_exact() const
    {
        if (!exact_available())
            throw mode_unavailable("exact evaluation needs rational shape data and an exact pose");
    }
    void check_rotation(const Eigen::MatrixXd& r) const
    {
        if (r.rows() != static_cast<Eigen::Index>(n_) || r.cols() != static_cast<Eigen::Index>(n_))
            throw std::invalid_argument("rotation: dimension mismatch");
        if (detail::orthogonality_defect(r) > 1e-12 || r.determinant() < 0)
            throw std::invalid_argument("rotation: matrix is not in SO(n)");
    }
    static bool is_zero_vector(const ExactVector& v)
    {
        for (const auto& x : v)
            if (!x.is_zero())
                return false;
        return true;
    }

    Shape shape_;
    std::size_t n_ = 0;
    Eigen::MatrixXd rot_f_;
    Eigen::VectorXd trans_f_;
    std::optional<ExactMatrix> rot_x_;
    std::optional<ExactVector> trans_x_;
};

/// Rotation of the domain about the origin by r (pose composition).
inline Domain apply_rotation(const Domain& dom, const Eigen::MatrixXd& r) { return dom.rotated(r); }

/// Membership of x; exact mode decides strictly, float mode reports
/// boundary_indeterminate within the guard band of the level set.
inline Membership contains(const Domain& dom, const ExactVector& x, EvalMode mode)
{
    if (mode == EvalMode::exact) {
        int s = (dom.functional_exact(x) - ExactScalar(1)).sign();
        return s < 0 ? Membership::inside : Membership::outside;
    }
    double g = dom.functional(detail::to_eigen(x));
    if (std::fabs(g - 1.0) <= kGuardBand)
        return Membership::boundary_indeterminate;
    return g < 1.0 ? Membership::inside : Membership::outside;
}

inline Membership contains(const Domain& dom, const Eigen::VectorXd& x)
{
    double g = dom.functional(x);
    if (std::fabs(g - 1.0) <= kGuardBand)
        return Membership::boundary_indeterminate;
    return g < 1.0 ? Membership::inside : Membership::outside;
}

/// Per-axis closed intervals containing the closure of the domain.
inline std::vector<std::pair<double, double>> bounding_box(const Domain& dom)
{
    std::size_t n = dom.dim();
    Eigen::VectorXd c = dom.world_center_f();
    std::vector<double> half(n);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Ball>) {
                std::fill(half.begin(), half.end(), std::sqrt(s.radius_sq.to_double()));
            } else if constexpr (std::is_same_v<S, Ellipsoid>) {
                Eigen::MatrixXd inv = dom.world_quadric_f().m.inverse();
                for (std::size_t i = 0; i < n; ++i)
                    half[i] = std::sqrt(inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
            } else {
                const Eigen::MatrixXd& rot = dom.rotation();
                bool axis_aligned = (rot - Eigen::MatrixXd::Identity(rot.rows(), rot.cols())).cwiseAbs().maxCoeff() == 0.0;
                double r = axis_aligned ? s.radius.to_double() : dom.outer_radius();
                std::fill(half.begin(), half.end(), r);
            }
        },
        dom.shape());
    std::vector<std::pair<double, double>> box(n);
    for (std::size_t i = 0; i < n; ++i)
        box[i] = {c(static_cast<Eigen::Index>(i)) - half[i], c(static_cast<Eigen::Index>(i)) + half[i]};
    return box;
}

/// Monte Carlo slice volume for any domain: uniform samples in the box
/// bounding the slice of the domain's outer sphere, until the relative
/// standard error drops below `rel_target` or `max_samples` is reached.
inline VolumeEstimate slice_volume_mc(const Domain& dom, const AffineSlice& slice, std::uint64_t seed,
                                      double rel_target = 1e-3, std::uint64_t max_samples = 20'000'000)
{
    const Eigen::Index m = slice.directions.cols();
    Eigen::VectorXd c = dom.world_center_f();
    double rad = dom.outer_radius();
    Eigen::VectorXd off = c - slice.base;
    Eigen::VectorXd u0 = slice.directions.transpose() * off;
    double dist_sq = (off - slice.directions * u0).squaredNorm();
    double rho_sq = rad * rad - dist_sq;
    if (rho_sq <= 0)
        return {0.0, 0.0};
    double rho = std::sqrt(rho_sq);
    double box_vol = std::pow(2.0 * rho, static_cast<double>(m));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uint64_t hits = 0, total = 0;
    const std::uint64_t batch = 20'000, min_samples = 100'000;
    Eigen::VectorXd u(m);
    while (total < max_samples) {
        for (std::uint64_t i = 0; i < batch; ++i) {
            for (Eigen::Index k = 0; k < m; ++k)
                u(k) = u0(k) + rho * unif(rng);
            if (dom.functional(slice.base + slice.directions * u) < 1.0)
                ++hits;
        }
        total += batch;
        if (total >= min_samples && hits > 0) {
            double ph = static_cast<double>(hits) / static_cast<double>(total);
            double rel = std::sqrt((1.0 - ph) / (ph * static_cast<double>(total)));
            if (rel <= rel_target)
                break;
        }
        if (total >= min_samples && hits == 0)
            break;
    }
    double ph = static_cast<double>(hits) / static_cast<double>(total);
    double se = std::sqrt(std::max(ph * (1.0 - ph), 1.0 / static_cast<double>(total)) / static_cast<double>(total));
    return {box_vol * ph, box_vol * se};
}

/// vol_m(slice cap domain). Closed form for quadrics, Monte Carlo for lp-balls.
inline VolumeEstimate slice_volume(const Domain& dom, const AffineSlice& slice, std::uint64_t seed)
{
    const Eigen::Index m = slice.directions.cols();
    if (m < 1)
        throw std::invalid_argument("slice_volume: slice dimension must be at least 1");
    if (!dom.is_quadric())
        return slice_volume_mc(dom, slice, seed);
    FloatQuadric q = dom.world_quadric_f();
    const Eigen::MatrixXd& w = slice.directions;
    Eigen::VectorXd e = slice.base - q.c;
    Eigen::MatrixXd a = w.transpose() * q.m * w;
    Eigen::VectorXd b = w.transpose() * q.m * e;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw geometry_error("slice_volume: restricted form is not positive definite");
    double ct = e.dot(q.m * e) - b.dot(llt.solve(b));
    if (ct >= 1.0)
        return {0.0, 0.0};
    double det = llt.matrixL().determinant();
    det *= det;
    double v = unit_ball_volume(static_cast<std::size_t>(m)) * std::pow(1.0 - ct, static_cast<double>(m) / 2.0)
        / std::sqrt(det);
    return {v, 0.0};
}

} // namespace aniso

#endif
