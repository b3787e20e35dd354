#ifndef ANISO_ROTATION_HPP
#define ANISO_ROTATION_HPP

#include "counting.hpp"
#include "decomposition.hpp"
#include "domain.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace aniso {

enum class GroupKind { so_h, so_vperp, so_full };

inline std::string to_string(GroupKind k)
{
    switch (k) {
    case GroupKind::so_h:
        return "so_H";
    case GroupKind::so_vperp:
        return "so_Vperp";
    case GroupKind::so_full:
        return "so_full";
    }
    return "?";
}

inline GroupKind parse_group(const std::string& s)
{
    if (s == "so_H" || s == "so_h")
        return GroupKind::so_h;
    if (s == "so_Vperp" || s == "so_vperp")
        return GroupKind::so_vperp;
    if (s == "so_full" || s == "so_n")
        return GroupKind::so_full;
    throw std::invalid_argument("unknown rotation group '" + s + "'");
}

/// A rotation subgroup of SO(n): SO(m) acting on the span of `frame`
/// and fixing its orthogonal complement pointwise.
///  - so_h:     rotates H, fixes F
///  - so_vperp: rotates V^perp, fixes V
///  - so_full:  all of SO(n)
struct RotationGroup
{
    GroupKind kind = GroupKind::so_full;
    std::size_t n = 0;
    Eigen::MatrixXd frame; // n x m, orthonormal columns

    static RotationGroup of(GroupKind kind, const Decomposition& dec)
    {
        RotationGroup g;
        g.kind = kind;
        g.n = dec.n;
        auto nn = static_cast<Eigen::Index>(dec.n);
        switch (kind) {
        case GroupKind::so_h:
            g.frame = dec.frame_h;
            break;
        case GroupKind::so_vperp:
            g.frame = dec.frame_vperp;
            break;
        case GroupKind::so_full:
            g.frame = Eigen::MatrixXd::Identity(nn, nn);
            break;
        }
        return g;
    }
    std::size_t dim() const { return static_cast<std::size_t>(frame.cols()); }
};

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of sample i: master XOR splitmix64(i).
inline std::uint64_t sample_seed(std::uint64_t master, std::uint64_t i) { return master ^ mix64(i); }

/// Haar-distributed m x m special orthogonal matrix: QR of a Gaussian matrix
/// with the signs of R's diagonal moved into Q, then one column flipped if det = -1.
inline Eigen::MatrixXd haar_special_orthogonal(std::size_t m, std::mt19937_64& rng)
{
    auto mm = static_cast<Eigen::Index>(m);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(mm, mm);
    for (Eigen::Index j = 0; j < mm; ++j)
        for (Eigen::Index i = 0; i < mm; ++i)
            z(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(mm, mm);
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < mm; ++j)
        if (r(j, j) < 0)
            q.col(j) *= -1.0;
    if (q.determinant() < 0)
        q.col(0) *= -1.0;
    return q;
}

/// One Haar sample h of the group, as an n x n matrix acting on R^n.
inline Eigen::MatrixXd sample_rotation(const RotationGroup& group, std::uint64_t seed)
{
    auto nn = static_cast<Eigen::Index>(group.n);
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(nn, nn);
    std::size_t m = group.dim();
    if (m < 2)
        return id;
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd q = haar_special_orthogonal(m, rng);
    const Eigen::MatrixXd& w = group.frame;
    Eigen::MatrixXd h = id + w * (q - Eigen::MatrixXd::Identity(q.rows(), q.cols())) * w.transpose();
    return h;
}

/// Monte Carlo estimate of the Haar average of |R_eps(hS)|.
struct AverageRecord
{
    Rational epsilon;
    std::size_t samples = 0;
    double mean_count = 0.0;
    double mean_remainder = 0.0;
    double mean_abs_remainder = 0.0;
    double std_error = 0.0;
    double main_term = 0.0; ///< main term of the unrotated body (so_H / so_Vperp) or mean over samples
    std::vector<std::uint64_t> seeds;
    std::vector<std::int64_t> counts;
    std::vector<double> remainders;
    std::vector<double> abs_remainders;
    std::int64_t guard_band_hits = 0;
    double wall_time = 0.0;

    bool flagged() const { return guard_band_hits > 0; }
};

/// Compensated (Kahan-Babuska/Neumaier) sum in index order.
inline double compensated_sum(const std::vector<double>& xs)
{
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double t = s + x;
        if (std::fabs(s) >= std::fabs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

/// Average of |R_eps(h S)| over the Haar samples drawn from `seeds` (one per sample).
///
/// so_H and so_Vperp samples preserve every plane P_{gamma*} and its slice
/// volumes, so the main term is computed once; so_full recomputes it per sample.
/// Counting runs in float mode (rotated poses are not exact) unless the body
/// stays exact under rotation (balls centered at the origin).
inline AverageRecord averaged_remainder_seeded(const Decomposition& dec, const Domain& dom, const Rational& eps,
                                               const RotationGroup& group, const std::vector<std::uint64_t>& seeds,
                                               std::uint64_t main_seed, unsigned jobs = 1)
{
    const std::size_t samples = seeds.size();
    if (samples < 2)
        throw std::invalid_argument("averaged_remainder: need at least 2 samples");
    if (group.n != dec.n)
        throw std::invalid_argument("averaged_remainder: group dimension mismatch");
    auto t0 = std::chrono::steady_clock::now();
    AverageRecord rec;
    rec.epsilon = eps;
    rec.samples = samples;
    rec.seeds = seeds;
    rec.counts.assign(samples, 0);
    rec.remainders.assign(samples, 0.0);
    rec.abs_remainders.assign(samples, 0.0);
    std::vector<double> mains(samples, 0.0);
    std::vector<std::int64_t> guards(samples, 0);

    const bool invariant_main = group.kind != GroupKind::so_full;
    MainTerm fixed_main;
    if (invariant_main)
        fixed_main = main_term(dec, dom, eps, main_seed);

    auto run_one = [&](std::size_t i) {
        Eigen::MatrixXd h = sample_rotation(group, rec.seeds[i]);
        Domain rotated = apply_rotation(dom, h);
        CountOptions opts;
        opts.mode = rotated.exact_available() ? EvalMode::exact : EvalMode::floating;
        MainTerm m = invariant_main ? fixed_main : main_term(dec, rotated, eps, rec.seeds[i]);
        CountRecord cr = remainder_with(dec, rotated, eps, m, opts);
        rec.counts[i] = cr.count;
        rec.remainders[i] = cr.remainder;
        rec.abs_remainders[i] = std::fabs(cr.remainder);
        mains[i] = m.value;
        guards[i] = cr.guard_band_hits;
    };

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
        try {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= samples)
                    return;
                run_one(i);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!failure)
                failure = std::current_exception();
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    double nn = static_cast<double>(samples);
    rec.mean_abs_remainder = compensated_sum(rec.abs_remainders) / nn;
    rec.mean_remainder = compensated_sum(rec.remainders) / nn;
    std::vector<double> cs(rec.counts.begin(), rec.counts.end());
    rec.mean_count = compensated_sum(cs) / nn;
    std::vector<double> dev(samples);
    for (std::size_t i = 0; i < samples; ++i)
        dev[i] = (rec.abs_remainders[i] - rec.mean_abs_remainder) * (rec.abs_remainders[i] - rec.mean_abs_remainder);
    double var = compensated_sum(dev) / (nn - 1.0);
    rec.std_error = std::sqrt(var / nn);
    rec.main_term = compensated_sum(mains) / nn;
    for (auto g : guards)
        rec.guard_band_hits += g;
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Average of |R_eps(h S)| over N Haar samples with seeds derived from master_seed.
inline AverageRecord averaged_remainder(const Decomposition& dec, const Domain& dom, const Rational& eps,
                                        const RotationGroup& group, std::size_t samples, std::uint64_t master_seed,
                                        unsigned jobs = 1)
{
    if (samples < 2)
        throw std::invalid_argument("averaged_remainder: need at least 2 samples");
    std::vector<std::uint64_t> seeds(samples);
    for (std::size_t i = 0; i < samples; ++i)
        seeds[i] = sample_seed(master_seed, i);
    return averaged_remainder_seeded(dec, dom, eps, group, seeds, master_seed, jobs);
}

} // namespace aniso

#endif
