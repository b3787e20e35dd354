#ifndef ANISO_COUNTING_HPP
#define ANISO_COUNTING_HPP

#include "decomposition.hpp"
#include "domain.hpp"
#include "enumerate.hpp"
#include "exact.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aniso {

enum class StretchDirection { forward, inverse };

/// Which remainder bound applies to a configuration.
enum class ExponentRegime { baseline, slicewise_convex, fully_convex };

inline std::string to_string(ExponentRegime r)
{
    switch (r) {
    case ExponentRegime::baseline:
        return "baseline";
    case ExponentRegime::slicewise_convex:
        return "slicewise_convex";
    case ExponentRegime::fully_convex:
        return "fully_convex";
    }
    return "?";
}

inline ExponentRegime parse_regime(const std::string& s)
{
    if (s == "baseline")
        return ExponentRegime::baseline;
    if (s == "slicewise_convex")
        return ExponentRegime::slicewise_convex;
    if (s == "fully_convex")
        return ExponentRegime::fully_convex;
    throw std::invalid_argument("unknown regime '" + s + "'");
}

/// Raised for F = R^n: nothing expands and no exponent is defined.
class degenerate_subspace : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

struct CountRecord
{
    Rational epsilon;
    std::int64_t count = 0;
    double main_term = 0.0;
    double main_term_error = 0.0;
    double remainder = 0.0;
    std::int64_t guard_band_hits = 0; ///< float mode only
    std::int64_t boundary_hits = 0;   ///< exact mode: lattice points exactly on the boundary (excluded)
    std::int64_t points_scanned = 0;
    double wall_time = 0.0;

    bool flagged() const { return guard_band_hits > 0; }
};

struct CountOptions
{
    EvalMode mode = EvalMode::exact;
    unsigned jobs = 1;
};

/// Exponent alpha of the bound R = O(eps^alpha).
inline Rational theoretical_exponent(std::size_t n, std::size_t p, std::size_t q, std::size_t r,
                                     ExponentRegime regime)
{
    if (p + q != n || r > p)
        throw std::invalid_argument("theoretical_exponent: inconsistent dimensions");
    if (q < 1)
        throw degenerate_subspace("theoretical_exponent: q must be at least 1");
    Rational qq(static_cast<long>(q));
    long pr = static_cast<long>(p - r);
    switch (regime) {
    case ExponentRegime::baseline:
        return make_rational(1, pr + 1) - qq;
    case ExponentRegime::slicewise_convex:
        return make_rational(2 * static_cast<long>(q), static_cast<long>(q) + 1 + 2 * pr) - qq;
    case ExponentRegime::fully_convex:
        return make_rational(2 * static_cast<long>(q), static_cast<long>(n - r) + 1) - qq;
    }
    throw std::invalid_argument("theoretical_exponent: unknown regime");
}

namespace detail {

inline void require_positive(const Rational& eps)
{
    if (sgn(eps) <= 0)
        throw std::invalid_argument("epsilon must be positive");
}

/// pi_F + s * pi_H, exactly.
inline ExactMatrix stretch_matrix(const Decomposition& dec, const Rational& s)
{
    return dec.proj_f + ExactScalar(s) * dec.proj_h;
}

inline Eigen::MatrixXd stretch_matrix_f(const Decomposition& dec, double s)
{
    return dec.proj_f_f + s * dec.proj_h_f;
}

} // namespace detail

/// T_eps (forward: pi_F x + eps^{-1} pi_H x) or its inverse, exactly.
inline ExactVector stretch(const Decomposition& dec, const ExactVector& x, const Rational& eps,
                           StretchDirection dir)
{
    detail::require_positive(eps);
    Rational s = dir == StretchDirection::forward ? Rational(1 / eps) : eps;
    return detail::stretch_matrix(dec, s).apply(x);
}

inline Eigen::VectorXd stretch(const Decomposition& dec, const Eigen::VectorXd& x, double eps,
                               StretchDirection dir)
{
    if (!(eps > 0))
        throw std::invalid_argument("epsilon must be positive");
    double s = dir == StretchDirection::forward ? 1.0 / eps : eps;
    return detail::stretch_matrix_f(dec, s) * x;
}

/// T_eps(S) prepared for lattice-point enumeration.
///
/// Quadrics become {k : (k - c')^T G (k - c') < 1} with G = T^-1 M T^-1 and
/// c' = T c; lp-balls are enumerated through their stretched bounding ball
/// and tested point by point. Membership is float-filtered: a double
/// evaluation with a magnitude-scaled error bound decides, and ambiguous
/// points fall back to exact arithmetic (exact mode) or are counted as
/// guard-band hits (float mode).
class StretchedBody
{
public:
    StretchedBody(const Decomposition& dec, const Domain& dom, const Rational& eps, EvalMode mode)
        : dec_(&dec), dom_(&dom), mode_(mode), n_(dec.n)
    {
        detail::require_positive(eps);
        if (dom.dim() != dec.n)
            throw std::invalid_argument("domain dimension does not match the ambient dimension");
        if (mode == EvalMode::exact && !dom.exact_available())
            throw mode_unavailable("exact mode needs rational shape data and an exact pose");
        const double e = eps.get_d();
        tinv_f_ = detail::stretch_matrix_f(dec, e);
        Eigen::MatrixXd t_f = detail::stretch_matrix_f(dec, 1.0 / e);
        FloatQuadric fq = dom.world_quadric_f();
        g_f_ = tinv_f_ * fq.m * tinv_f_;
        g_f_ = 0.5 * (g_f_ + g_f_.transpose());
        c_f_ = t_f * fq.c;
        g_abs_ = g_f_.cwiseAbs();

        if (mode == EvalMode::exact) {
            tinv_x_ = detail::stretch_matrix(dec, eps);
            ExactMatrix t_x = detail::stretch_matrix(dec, Rational(1 / eps));
            if (dom.is_quadric()) {
                ExactQuadric xq = dom.world_quadric_exact();
                g_x_ = tinv_x_ * xq.m * tinv_x_;
                c_x_ = t_x.apply(xq.c);
            }
        }
        if (!dom.is_quadric()) {
            const auto& lp = std::get<LpBall>(dom.shape());
            lp_exponent_ = lp.exponent;
            lp_radius_ = lp.radius.to_double();
            lp_scale_ = dom.translation().cwiseAbs().maxCoeff() + detail::to_eigen(lp.center).cwiseAbs().maxCoeff();
            tinv_max_ = tinv_f_.cwiseAbs().maxCoeff();
        }

        std::vector<double> g(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                g[i * n_ + j] = g_f_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        std::vector<double> c(c_f_.data(), c_f_.data() + n_);
        enumerator_.emplace(PrefixForm(g, n_), std::move(c), 1.0);
    }

    const RowEnumerator& enumerator() const { return *enumerator_; }
    std::size_t dim() const { return n_; }
    bool quadric() const { return dom_->is_quadric(); }
    EvalMode mode() const { return mode_; }
    double curvature_last() const { return g_f_(static_cast<Eigen::Index>(n_ - 1), static_cast<Eigen::Index>(n_ - 1)); }

    struct Verdict
    {
        bool inside = false;
        bool boundary = false; ///< exact: on the boundary; float: inside the guard band
    };

    /// Membership of the lattice point k in T_eps(S).
    Verdict classify(std::span<const std::int64_t> k) const
    {
        return quadric() ? classify_quadric(k) : classify_lp(k);
    }

private:
    Verdict classify_quadric(std::span<const std::int64_t> k) const
    {
        double val = 0.0, mag = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            auto ii = static_cast<Eigen::Index>(i);
            double yi = static_cast<double>(k[i]) - c_f_(ii);
            double ai = std::fabs(static_cast<double>(k[i])) + std::fabs(c_f_(ii));
            for (std::size_t j = 0; j < n_; ++j) {
                auto jj = static_cast<Eigen::Index>(j);
                double yj = static_cast<double>(k[j]) - c_f_(jj);
                val += g_f_(ii, jj) * yi * yj;
                mag += g_abs_(ii, jj) * ai * (std::fabs(static_cast<double>(k[j])) + std::fabs(c_f_(jj)));
            }
        }
        if (mode_ == EvalMode::floating) {
            return {val < 1.0, std::fabs(val - 1.0) <= kGuardBand};
        }
        double tol = 1e-12 * (1.0 + mag);
        if (val < 1.0 - tol)
            return {true, false};
        if (val > 1.0 + tol)
            return {false, false};
        ExactVector y(n_);
        for (std::size_t i = 0; i < n_; ++i)
            y[i] = ExactScalar(static_cast<long>(k[i])) - c_x_[i];
        ExactScalar acc;
        for (std::size_t i = 0; i < n_; ++i) {
            acc += g_x_(i, i) * y[i] * y[i];
            for (std::size_t j = i + 1; j < n_; ++j)
                acc += ExactScalar(2) * g_x_(i, j) * y[i] * y[j];
        }
        int s = (acc - ExactScalar(1)).sign();
        return {s < 0, s == 0};
    }

    Verdict classify_lp(std::span<const std::int64_t> k) const
    {
        Eigen::VectorXd kv(static_cast<Eigen::Index>(n_));
        double kmax = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            kv(static_cast<Eigen::Index>(i)) = static_cast<double>(k[i]);
            kmax = std::max(kmax, std::fabs(static_cast<double>(k[i])));
        }
        Eigen::VectorXd x = tinv_f_ * kv;
        double g = dom_->functional(x);
        if (mode_ == EvalMode::floating)
            return {g < 1.0, std::fabs(g - 1.0) <= kGuardBand};
        // |du| bounds the rounding error of each rotated, shifted coordinate
        const auto& rot = dom_->rotation();
        Eigen::VectorXd u = rot.transpose() * (x - dom_->translation());
        double du = 1e-13 * static_cast<double>(n_ * n_) * (1.0 + kmax * tinv_max_ * static_cast<double>(n_) + lp_scale_);
        double err = 1e-14 * g;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            err += lp_exponent_ * std::pow((std::fabs(u(i)) + lp_scale_ + du) / lp_radius_, lp_exponent_ - 1) * du
                / lp_radius_;
        err *= 10.0;
        if (g < 1.0 - err)
            return {true, false};
        if (g > 1.0 + err)
            return {false, false};
        ExactVector kx(n_);
        for (std::size_t i = 0; i < n_; ++i)
            kx[i] = ExactScalar(static_cast<long>(k[i]));
        int s = (dom_->functional_exact(tinv_x_.apply(kx)) - ExactScalar(1)).sign();
        return {s < 0, s == 0};
    }

    const Decomposition* dec_;
    const Domain* dom_;
    EvalMode mode_;
    std::size_t n_;
    Eigen::MatrixXd tinv_f_, g_f_, g_abs_;
    Eigen::VectorXd c_f_;
    ExactMatrix tinv_x_, g_x_;
    ExactVector c_x_;
    int lp_exponent_ = 2;
    double lp_radius_ = 1.0, lp_scale_ = 0.0, tinv_max_ = 1.0;
    std::optional<RowEnumerator> enumerator_;
};

namespace detail {

struct RowTally
{
    std::int64_t count = 0;
    std::int64_t guard = 0;
    std::int64_t boundary = 0;
    std::int64_t scanned = 0;

    RowTally& operator+=(const RowTally& o)
    {
        count += o.count;
        guard += o.guard;
        boundary += o.boundary;
        scanned += o.scanned;
        return *this;
    }
};

/// Resolves one row into [lo, hi] and tallies boundary/guard events.
/// `on_point` (optional) receives every interior lattice point.
template <class OnPoint>
RowTally process_row(const StretchedBody& body, const Row& row, OnPoint&& on_point)
{
    const std::size_t n = body.dim();
    std::vector<std::int64_t> k(row.prefix.begin(), row.prefix.end());
    k.push_back(0);
    RowTally tally;
    if (body.quadric()) {
        // memo of (t, verdict) so that each probe is evaluated and tallied once
        std::vector<std::pair<std::int64_t, StretchedBody::Verdict>> memo;
        auto inside = [&](std::int64_t t) {
            for (const auto& [mt, v] : memo)
                if (mt == t)
                    return v.inside;
            k[n - 1] = t;
            auto v = body.classify(k);
            memo.emplace_back(t, v);
            return v.inside;
        };
        auto [lo, hi] = resolve_row(row, inside);
        tally.scanned = static_cast<std::int64_t>(memo.size());
        if (body.mode() == EvalMode::exact) {
            for (const auto& [mt, v] : memo)
                tally.boundary += v.boundary ? 1 : 0;
        } else {
            // integers t with |q(t) - 1| <= guard band, from the row's parabola
            double a = body.curvature_last();
            auto count_within = [&](double w2, bool strict) -> std::int64_t {
                if (w2 < 0)
                    return 0;
                double w = std::sqrt(w2);
                std::int64_t l = strict ? checked_floor(row.center - w) + 1 : checked_ceil(row.center - w);
                std::int64_t h = strict ? checked_ceil(row.center + w) - 1 : checked_floor(row.center + w);
                return std::max<std::int64_t>(0, h - l + 1);
            };
            tally.guard = count_within(row.half_width_sq + kGuardBand / a, false)
                - count_within(row.half_width_sq - kGuardBand / a, true);
        }
        if (lo <= hi) {
            tally.count = hi - lo + 1;
            if constexpr (!std::is_same_v<std::decay_t<OnPoint>, std::nullptr_t>)
                for (std::int64_t t = lo; t <= hi; ++t) {
                    k[n - 1] = t;
                    on_point(std::span<const std::int64_t>(k));
                }
        }
        return tally;
    }
    // lp-ball: scan the candidate interval of the bounding ball
    double w = std::sqrt(std::max(row.half_width_sq, 0.0));
    std::int64_t lo = checked_floor(row.center - w) - 1, hi = checked_ceil(row.center + w) + 1;
    for (std::int64_t t = lo; t <= hi; ++t) {
        k[n - 1] = t;
        auto v = body.classify(k);
        ++tally.scanned;
        if (v.boundary) {
            if (body.mode() == EvalMode::exact)
                ++tally.boundary;
            else
                ++tally.guard;
        }
        if (v.inside) {
            ++tally.count;
            if constexpr (!std::is_same_v<std::decay_t<OnPoint>, std::nullptr_t>)
                on_point(std::span<const std::int64_t>(k));
        }
    }
    return tally;
}

/// Splits the outermost range into chunks processed by `jobs` threads;
/// each chunk's tally lands in its own slot, so the sum is schedule-independent.
inline RowTally parallel_tally(const StretchedBody& body, unsigned jobs)
{
    const auto& en = body.enumerator();
    auto [lo, hi] = en.outer_range();
    if (en.dim() == 1 || lo > hi || jobs <= 1) {
        RowTally total;
        auto visit = [&](const Row& row) { total += process_row(body, row, nullptr); };
        if (en.dim() == 1)
            en.visit(0, 0, visit);
        else if (lo <= hi)
            en.visit(lo, hi, visit);
        return total;
    }
    const std::int64_t span = hi - lo + 1;
    const std::int64_t chunks = std::min<std::int64_t>(span, static_cast<std::int64_t>(jobs) * 8);
    std::vector<RowTally> slots(static_cast<std::size_t>(chunks));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        try {
            for (;;) {
                std::int64_t c = next.fetch_add(1);
                if (c >= chunks)
                    return;
                std::int64_t a = lo + span * c / chunks, b = lo + span * (c + 1) / chunks - 1;
                RowTally local;
                en.visit(a, b, [&](const Row& row) { local += process_row(body, row, nullptr); });
                slots[static_cast<std::size_t>(c)] = local;
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure)
                failure = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
    RowTally total;
    for (const auto& s : slots)
        total += s;
    return total;
}

} // namespace detail

/// n_eps(S) = #(T_eps(S) cap Z^n), with bookkeeping. The main term fields are left zero.
inline CountRecord count_points(const Decomposition& dec, const Domain& dom, const Rational& eps,
                                const CountOptions& opts = {})
{
    StretchedBody body(dec, dom, eps, opts.mode);
    auto tally = detail::parallel_tally(body, opts.jobs);
    CountRecord rec;
    rec.epsilon = eps;
    rec.count = tally.count;
    rec.guard_band_hits = tally.guard;
    rec.boundary_hits = tally.boundary;
    rec.points_scanned = tally.scanned;
    return rec;
}

/// Counts of every nonempty fiber Z^n_{gamma*}, keyed by dual coordinates.
inline std::map<DualCoords, std::int64_t> count_points_by_fiber(const Decomposition& dec, const Domain& dom,
                                                                const Rational& eps, EvalMode mode = EvalMode::exact)
{
    StretchedBody body(dec, dom, eps, mode);
    std::map<DualCoords, std::int64_t> fibers;
    body.enumerator().visit_all([&](const Row& row) {
        detail::process_row(body, row, [&](std::span<const std::int64_t> k) { ++fibers[classify_fiber(dec, k)]; });
    });
    return fibers;
}

/// n_eps(S, gamma*): lattice points of T_eps(S) lying on the plane P_{gamma*}.
inline std::int64_t count_points_fiber(const Decomposition& dec, const Domain& dom, const Rational& eps,
                                       const DualCoords& gamma_star, EvalMode mode = EvalMode::exact)
{
    if (gamma_star.size() != dec.r)
        throw std::invalid_argument("count_points_fiber: dual point has wrong rank");
    StretchedBody body(dec, dom, eps, mode);
    std::int64_t count = 0;
    body.enumerator().visit_all([&](const Row& row) {
        detail::process_row(body, row, [&](std::span<const std::int64_t> k) {
            if (classify_fiber(dec, k) == gamma_star)
                ++count;
        });
    });
    return count;
}

struct MainTerm
{
    double value = 0.0;
    double error = 0.0;
};

/// Radius beyond which every plane P_{gamma*} misses S: |pi_V(c)| + R_outer.
inline double dual_truncation_radius(const Decomposition& dec, const Domain& dom)
{
    Eigen::VectorXd c = dom.world_center_f();
    return (dec.proj_v_f * c).norm() + dom.outer_radius() * (1.0 + 1e-12) + 1e-12;
}

/// Sum of (n - r)-dimensional slice volumes vol(P_{gamma*} cap S), unscaled.
inline MainTerm slice_volume_sum(const Decomposition& dec, const Domain& dom, std::uint64_t seed)
{
    auto points = enumerate_dual_points(dec, dual_truncation_radius(dec, dom));
    MainTerm sum;
    double var = 0.0;
    std::uint64_t idx = 0;
    for (const auto& m : points) {
        AffineSlice slice{dual_point_f(dec, m), dec.frame_vperp};
        // per-slice seed: golden-ratio increment keeps streams distinct
        auto v = slice_volume(dom, slice, seed + 0x9E3779B97F4A7C15ULL * (++idx));
        sum.value += v.value;
        var += v.error * v.error;
    }
    sum.error = std::sqrt(var);
    return sum;
}

/// eps^{-q} / vol(V/Gamma) scaling of the slice sum.
inline double main_term_scale(const Decomposition& dec, const Rational& eps)
{
    detail::require_positive(eps);
    if (dec.q == 0)
        throw degenerate_subspace("F = R^n: nothing expands");
    Rational inv = 1 / eps;
    Rational s = 1;
    for (std::size_t i = 0; i < dec.q; ++i)
        s *= inv;
    return s.get_d() / dec.covolume();
}

/// M_eps(S) = eps^{-q} / vol(V/Gamma) * sum_{gamma*} vol_{n-r}(P_{gamma*} cap S).
inline MainTerm main_term(const Decomposition& dec, const Domain& dom, const Rational& eps, std::uint64_t seed = 0)
{
    double scale = main_term_scale(dec, eps);
    MainTerm s = slice_volume_sum(dec, dom, seed);
    return {scale * s.value, scale * s.error};
}

/// Count, main term, and remainder R_eps(S) = n_eps(S) - M_eps(S).
inline CountRecord remainder(const Decomposition& dec, const Domain& dom, const Rational& eps,
                             const CountOptions& opts = {}, std::uint64_t seed = 0)
{
    if (dec.q == 0)
        throw degenerate_subspace("F = R^n: nothing expands");
    auto t0 = std::chrono::steady_clock::now();
    CountRecord rec = count_points(dec, dom, eps, opts);
    MainTerm m = main_term(dec, dom, eps, seed);
    rec.main_term = m.value;
    rec.main_term_error = m.error;
    rec.remainder = static_cast<double>(rec.count) - m.value;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Remainder with a precomputed main term (for rotations that preserve it).
inline CountRecord remainder_with(const Decomposition& dec, const Domain& dom, const Rational& eps,
                                  const MainTerm& m, const CountOptions& opts = {})
{
    auto t0 = std::chrono::steady_clock::now();
    CountRecord rec = count_points(dec, dom, eps, opts);
    rec.main_term = m.value;
    rec.main_term_error = m.error;
    rec.remainder = static_cast<double>(rec.count) - m.value;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Integer box covering T_eps(S), from the stretched bounding sphere.
inline std::vector<std::pair<std::int64_t, std::int64_t>> stretched_box(const Decomposition& dec, const Domain& dom,
                                                                        const Rational& eps)
{
    const double e = eps.get_d();
    Eigen::MatrixXd t_f = detail::stretch_matrix_f(dec, 1.0 / e);
    Eigen::MatrixXd t2 = dec.proj_f_f + (1.0 / (e * e)) * dec.proj_h_f;
    Eigen::VectorXd c = t_f * dom.world_center_f();
    double rad = dom.outer_radius();
    std::vector<std::pair<std::int64_t, std::int64_t>> box(dec.n);
    for (std::size_t i = 0; i < dec.n; ++i) {
        auto ii = static_cast<Eigen::Index>(i);
        double h = rad * std::sqrt(std::max(t2(ii, ii), 0.0)) * (1 + 1e-9) + 1e-9;
        box[i] = {detail::checked_floor(c(ii) - h), detail::checked_ceil(c(ii) + h)};
    }
    return box;
}

inline double box_volume(const std::vector<std::pair<std::int64_t, std::int64_t>>& box)
{
    double v = 1.0;
    for (auto [a, b] : box)
        v *= static_cast<double>(b - a + 1);
    return v;
}

/// Unpruned scan of the whole integer box with per-point membership of
/// T_eps^{-1} k in S. Independent of the row machinery; used as a test oracle.
inline CountRecord naive_count(const Decomposition& dec, const Domain& dom, const Rational& eps,
                               EvalMode mode = EvalMode::exact)
{
    detail::require_positive(eps);
    if (mode == EvalMode::exact && !dom.exact_available())
        throw mode_unavailable("exact mode needs rational shape data and an exact pose");
    auto box = stretched_box(dec, dom, eps);
    const std::size_t n = dec.n;
    Eigen::MatrixXd tinv_f = detail::stretch_matrix_f(dec, eps.get_d());
    ExactMatrix tinv_x = mode == EvalMode::exact ? detail::stretch_matrix(dec, eps) : ExactMatrix();
    CountRecord rec;
    rec.epsilon = eps;
    std::vector<std::int64_t> k(n);
    for (std::size_t i = 0; i < n; ++i)
        k[i] = box[i].first;
    Eigen::VectorXd kv(static_cast<Eigen::Index>(n));
    for (;;) {
        for (std::size_t i = 0; i < n; ++i)
            kv(static_cast<Eigen::Index>(i)) = static_cast<double>(k[i]);
        double g = dom.functional(tinv_f * kv);
        ++rec.points_scanned;
        if (mode == EvalMode::floating) {
            if (std::fabs(g - 1.0) <= kGuardBand)
                ++rec.guard_band_hits;
            if (g < 1.0)
                ++rec.count;
        } else if (std::fabs(g - 1.0) > 1e-8) {
            if (g < 1.0)
                ++rec.count;
        } else {
            ExactVector kx(n);
            for (std::size_t i = 0; i < n; ++i)
                kx[i] = ExactScalar(static_cast<long>(k[i]));
            int s = (dom.functional_exact(tinv_x.apply(kx)) - ExactScalar(1)).sign();
            if (s < 0)
                ++rec.count;
            if (s == 0)
                ++rec.boundary_hits;
        }
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (k[i] < box[i].second) {
                ++k[i];
                break;
            }
            k[i] = box[i].first;
            if (i == 0)
                return rec;
        }
    }
}

} // namespace aniso

#endif
