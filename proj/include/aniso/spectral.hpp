#ifndef ANISO_SPECTRAL_HPP
#define ANISO_SPECTRAL_HPP

#include "counting.hpp"
#include "decomposition.hpp"
#include "domain.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>

namespace aniso {

inline constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

/// The torus R^n / Z^n with the metric g_F + eps^{-2} g_H and a constant
/// magnetic potential A. Eigenvalues of the magnetic Laplacian are
/// lambda_k = 4 pi^2 (|pi_F(k - A)|^2 + eps^2 |pi_H(k - A)|^2).
///
/// Spectral levels are passed as lambda / (4 pi^2) so that they stay exact.
class MagneticTorus
{
public:
    MagneticTorus(const Decomposition& dec, ExactVector potential) : dec_(&dec), potential_(std::move(potential))
    {
        if (potential_.size() != dec.n)
            throw std::invalid_argument("MagneticTorus: potential must have n components");
    }

    const Decomposition& decomposition() const { return *dec_; }
    const ExactVector& potential() const { return potential_; }

    /// lambda_k / (4 pi^2) = y^T (pi_F + eps^2 pi_H) y with y = k - A.
    ExactScalar reduced_eigenvalue(std::span<const std::int64_t> k, const Rational& eps) const
    {
        check(k);
        ExactMatrix g = dec_->proj_f + ExactScalar(Rational(eps * eps)) * dec_->proj_h;
        ExactVector y(dec_->n);
        for (std::size_t i = 0; i < dec_->n; ++i)
            y[i] = ExactScalar(static_cast<long>(k[i])) - potential_[i];
        ExactScalar acc;
        for (std::size_t i = 0; i < dec_->n; ++i)
            for (std::size_t j = 0; j < dec_->n; ++j)
                acc += g(i, j) * y[i] * y[j];
        return acc;
    }

    double eigenvalue(std::span<const std::int64_t> k, double eps) const
    {
        check(k);
        Eigen::VectorXd y(static_cast<Eigen::Index>(dec_->n));
        for (std::size_t i = 0; i < dec_->n; ++i)
            y(static_cast<Eigen::Index>(i)) = static_cast<double>(k[i]) - potential_[i].to_double();
        double f = (dec_->proj_f_f * y).squaredNorm();
        double h = (dec_->proj_h_f * y).squaredNorm();
        return kFourPiSq * (f + eps * eps * h);
    }

    /// T_eps^{-1}(A) = pi_F(A) + eps pi_H(A).
    ExactVector pulled_back_potential(const Rational& eps) const
    {
        return stretch(*dec_, potential_, eps, StretchDirection::inverse);
    }

private:
    void check(std::span<const std::int64_t> k) const
    {
        if (k.size() != dec_->n)
            throw std::invalid_argument("MagneticTorus: lattice point dimension mismatch");
    }

    const Decomposition* dec_;
    ExactVector potential_;
};

inline double eigenvalue(const MagneticTorus& mt, std::span<const std::int64_t> k, double eps)
{
    return mt.eigenvalue(k, eps);
}

/// N_eps(lambda) = #{k : lambda_k < lambda} for lambda = 4 pi^2 * level.
///
/// Counted directly in k-space as the lattice points of the ellipsoid
/// {x : (x - A)^T (pi_F + eps^2 pi_H) (x - A) < level}, i.e. with the trivial stretch.
inline CountRecord counting_function(const MagneticTorus& mt, const ExactScalar& level, const Rational& eps,
                                     const CountOptions& opts = {})
{
    detail::require_positive(eps);
    const Decomposition& dec = mt.decomposition();
    if (level.sign() <= 0) {
        CountRecord rec;
        rec.epsilon = eps;
        return rec;
    }
    ExactMatrix quad = level.inverse() * (dec.proj_f + ExactScalar(Rational(eps * eps)) * dec.proj_h);
    Domain ell = Domain::ellipsoid(mt.potential(), quad);
    CountRecord rec = count_points(dec, ell, Rational(1), opts);
    rec.epsilon = eps;
    return rec;
}

/// eps^{-q} omega_{n-r} / vol(V/Gamma) * sum_{gamma*} max(level - |gamma* - pi_V A|^2, 0)^{(n-r)/2}.
inline double weyl_prediction(const MagneticTorus& mt, double level, const Rational& eps)
{
    const Decomposition& dec = mt.decomposition();
    if (!(level > 0))
        return 0.0;
    Eigen::VectorXd a(static_cast<Eigen::Index>(dec.n));
    for (std::size_t i = 0; i < dec.n; ++i)
        a(static_cast<Eigen::Index>(i)) = mt.potential()[i].to_double();
    Eigen::VectorXd av = dec.proj_v_f * a;
    double radius = av.norm() + std::sqrt(level) * (1 + 1e-12) + 1e-12;
    const double half = static_cast<double>(dec.n - dec.r) / 2.0;
    double sum = 0.0;
    for (const auto& m : enumerate_dual_points(dec, radius)) {
        double d2 = (dual_point_f(dec, m) - av).squaredNorm();
        if (level > d2)
            sum += std::pow(level - d2, half);
    }
    return main_term_scale(dec, eps) * unit_ball_volume(dec.n - dec.r) * sum;
}

struct CrosscheckResult
{
    bool agree = false;
    std::int64_t spectral_count = 0; ///< N_eps(4 pi^2 level)
    std::int64_t lattice_count = 0;  ///< n_eps(B_sqrt(level)(T_eps^{-1} A))
};

/// N_eps(4 pi^2 level) against n_eps of the ball of radius sqrt(level)
/// centered at T_eps^{-1}(A); the two sets of lattice points coincide.
inline CrosscheckResult crosscheck_identity(const MagneticTorus& mt, const ExactScalar& level, const Rational& eps,
                                            const CountOptions& opts = {})
{
    if (level.sign() <= 0)
        throw std::invalid_argument("crosscheck_identity: level must be positive");
    CrosscheckResult res;
    res.spectral_count = counting_function(mt, level, eps, opts).count;
    Domain ball = Domain::ball(mt.pulled_back_potential(eps), level);
    res.lattice_count = count_points(mt.decomposition(), ball, eps, opts).count;
    res.agree = res.spectral_count == res.lattice_count;
    return res;
}

} // namespace aniso

#endif
