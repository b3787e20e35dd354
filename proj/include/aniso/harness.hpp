#ifndef ANISO_HARNESS_HPP
#define ANISO_HARNESS_HPP

#include "config.hpp"
#include "counting.hpp"
#include "decomposition.hpp"
#include "rotation.hpp"
#include "spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#define ANISO_VERSION "1.0.0"

namespace aniso {

class insufficient_data : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class instance_too_large : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kIndividualTolerance = 0.2;
inline constexpr double kAveragedTolerance = 0.25;
inline constexpr double kOracleLimit = 1e8;

struct ExponentFit
{
    double ls_slope = 0.0;
    double envelope_slope = 0.0;
    std::size_t used = 0;  ///< points with |R| > 0
    std::size_t zeros = 0; ///< points excluded for |R| = 0
};

namespace detail {

inline double ls_slope(const std::vector<std::pair<double, double>>& xy)
{
    double n = static_cast<double>(xy.size());
    double mx = 0, my = 0;
    for (auto [x, y] : xy) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (auto [x, y] : xy) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (sxx == 0)
        throw insufficient_data("fit_exponents: all epsilon values coincide");
    return sxy / sxx;
}

} // namespace detail

/// Least-squares slopes of log|R| against log eps.
///
/// The envelope replaces |R|(eps_j) by the running maximum over eps_i >= eps_j,
/// accumulated from the largest eps downward. Zero remainders are left out
/// of both fits.
inline ExponentFit fit_exponents(std::vector<std::pair<double, double>> series)
{
    for (auto& p : series)
        p.second = std::fabs(p.second);
    std::sort(series.begin(), series.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    ExponentFit fit;
    std::vector<std::pair<double, double>> raw, env;
    double running = 0.0;
    for (auto [e, r] : series) {
        if (!(e > 0))
            throw std::invalid_argument("fit_exponents: epsilon must be positive");
        running = std::max(running, r);
        if (r > 0) {
            raw.emplace_back(std::log(e), std::log(r));
            env.emplace_back(std::log(e), std::log(running));
        } else {
            ++fit.zeros;
        }
    }
    fit.used = raw.size();
    if (raw.size() < 3)
        throw insufficient_data("fit_exponents: need at least 3 nonzero remainders, got " +
                                std::to_string(raw.size()));
    fit.ls_slope = detail::ls_slope(raw);
    fit.envelope_slope = detail::ls_slope(env);
    return fit;
}

struct SpectralRecord
{
    ExactScalar level; ///< lambda / (4 pi^2)
    double lambda = 0.0;
    Rational epsilon;
    std::int64_t counting_value = 0;
    double prediction = 0.0;
    double deviation = 0.0;
    double normalized_deviation = 0.0; ///< eps^q |deviation|
    bool crosscheck = false;
    std::int64_t lattice_count = 0;
    std::int64_t guard_band_hits = 0;
    double wall_time = 0.0;
};

/// One fitted series with its verdict against the theoretical exponent.
struct SeriesFit
{
    std::string label;
    std::optional<ExponentFit> fit;
    std::string error; ///< set when fitting failed
    std::optional<bool> verdict;
};

enum class ReportKind { sweep, average, spectral };

inline std::string to_string(ReportKind k)
{
    switch (k) {
    case ReportKind::sweep:
        return "sweep";
    case ReportKind::average:
        return "average";
    case ReportKind::spectral:
        return "spectral";
    }
    return "?";
}

struct SweepReport
{
    ReportKind kind = ReportKind::sweep;
    std::string config_source;
    std::size_t n = 0, p = 0, q = 0, r = 0;
    long discriminant = 0;
    std::string shape;
    EvalMode mode = EvalMode::exact;
    ExponentRegime regime = ExponentRegime::fully_convex;
    std::uint64_t seed = 0;
    std::optional<RotationSettings> rotation;
    std::vector<CountRecord> counts;
    std::vector<AverageRecord> averages;
    std::vector<SpectralRecord> spectra;
    std::vector<SeriesFit> fits;
    Rational theoretical;
    double tolerance = kIndividualTolerance;
    bool tainted = false;
    std::optional<bool> verdict; ///< withheld when tainted
    std::string version = ANISO_VERSION;
    double total_runtime = 0.0;
};

struct RunOptions
{
    unsigned jobs = 1;
    bool timings = false; ///< record wall clock times (off keeps reports byte-stable)
    std::optional<EvalMode> mode;
    std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::vector<Rational> checked_grid(const ExperimentConfig& cfg)
{
    if (cfg.grid_count < 3)
        throw insufficient_data("epsilon grid needs at least 3 points for a fit");
    return cfg.epsilon_grid();
}

inline void fill_header(SweepReport& rep, const ExperimentConfig& cfg, const Decomposition& dec, const Domain& dom,
                        const RunOptions& opts)
{
    rep.config_source = cfg.source;
    rep.n = dec.n;
    rep.p = dec.p;
    rep.q = dec.q;
    rep.r = dec.r;
    rep.discriminant = dec.discriminant;
    rep.shape = dom.shape_name();
    rep.mode = opts.mode.value_or(cfg.mode);
    rep.regime = cfg.regime;
    rep.seed = opts.seed.value_or(cfg.seed);
    rep.rotation = cfg.rotation;
}

inline SeriesFit fit_series(const std::string& label, const std::vector<std::pair<double, double>>& xy,
                            const Rational& theoretical, double tolerance)
{
    SeriesFit s;
    s.label = label;
    try {
        s.fit = fit_exponents(xy);
        s.verdict = s.fit->envelope_slope <= theoretical.get_d() + tolerance;
    } catch (const insufficient_data& e) {
        s.error = e.what();
    }
    return s;
}

inline void settle_verdict(SweepReport& rep)
{
    if (rep.tainted) {
        rep.verdict.reset();
        return;
    }
    bool all = true;
    for (const auto& f : rep.fits) {
        if (!f.verdict) {
            if (rep.fits.size() == 1)
                throw insufficient_data(f.error);
            all = false;
            continue;
        }
        all = all && *f.verdict;
    }
    rep.verdict = all;
}

inline double elapsed(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Recomputes the verdict from the stored records alone.
inline std::optional<bool> recompute_verdict(const SweepReport& rep)
{
    if (rep.tainted)
        return std::nullopt;
    std::vector<std::vector<std::pair<double, double>>> series;
    switch (rep.kind) {
    case ReportKind::sweep:
        series.emplace_back();
        for (const auto& c : rep.counts)
            series.back().emplace_back(c.epsilon.get_d(), c.remainder);
        break;
    case ReportKind::average:
        series.emplace_back();
        for (const auto& a : rep.averages)
            series.back().emplace_back(a.epsilon.get_d(), a.mean_abs_remainder);
        break;
    case ReportKind::spectral: {
        std::vector<ExactScalar> levels;
        for (const auto& s : rep.spectra) {
            std::size_t i = 0;
            while (i < levels.size() && levels[i] != s.level)
                ++i;
            if (i == levels.size()) {
                levels.push_back(s.level);
                series.emplace_back();
            }
            series[i].emplace_back(s.epsilon.get_d(), s.deviation);
        }
        for (const auto& s : rep.spectra)
            if (!s.crosscheck)
                return false;
        break;
    }
    }
    bool all = true;
    for (const auto& xy : series) {
        try {
            all = all && fit_exponents(xy).envelope_slope <= rep.theoretical.get_d() + rep.tolerance;
        } catch (const insufficient_data&) {
            if (series.size() == 1)
                throw;
            all = false;
        }
    }
    return all;
}

/// Remainders over the epsilon grid with slope fits against the regime's exponent.
inline SweepReport run_sweep(const ExperimentConfig& cfg, const RunOptions& opts = {})
{
    auto t0 = std::chrono::steady_clock::now();
    auto grid = detail::checked_grid(cfg);
    Decomposition dec = decompose(cfg.subspace());
    Domain dom = cfg.build_domain();
    SweepReport rep;
    rep.kind = ReportKind::sweep;
    detail::fill_header(rep, cfg, dec, dom, opts);
    rep.theoretical = theoretical_exponent(dec.n, dec.p, dec.q, dec.r, cfg.regime);
    rep.tolerance = kIndividualTolerance;
    CountOptions co{rep.mode, opts.jobs};
    std::vector<std::pair<double, double>> xy;
    for (const auto& eps : grid) {
        CountRecord rec = remainder(dec, dom, eps, co, rep.seed);
        if (!opts.timings)
            rec.wall_time = 0.0;
        rep.tainted = rep.tainted || rec.flagged();
        xy.emplace_back(eps.get_d(), rec.remainder);
        rep.counts.push_back(rec);
    }
    rep.fits.push_back(detail::fit_series("remainder", xy, rep.theoretical, rep.tolerance));
    detail::settle_verdict(rep);
    rep.total_runtime = opts.timings ? detail::elapsed(t0) : 0.0;
    return rep;
}

/// Rotation-averaged remainders over the epsilon grid.
inline SweepReport run_average_sweep(const ExperimentConfig& cfg, const RunOptions& opts = {})
{
    auto t0 = std::chrono::steady_clock::now();
    if (!cfg.rotation)
        throw config_error("average sweep needs a [rotation] section");
    if (cfg.rotation->samples < 2)
        throw config_error("rotation samples must be at least 2");
    auto grid = detail::checked_grid(cfg);
    Decomposition dec = decompose(cfg.subspace());
    Domain dom = cfg.build_domain();
    SweepReport rep;
    rep.kind = ReportKind::average;
    detail::fill_header(rep, cfg, dec, dom, opts);
    std::uint64_t master = opts.seed.value_or(cfg.rotation->seed);
    rep.seed = master;
    rep.rotation->seed = master;
    rep.theoretical = theoretical_exponent(dec.n, dec.p, dec.q, dec.r, cfg.regime);
    rep.tolerance = kAveragedTolerance;
    RotationGroup group = RotationGroup::of(cfg.rotation->group, dec);
    std::vector<std::pair<double, double>> xy;
    for (const auto& eps : grid) {
        AverageRecord rec = averaged_remainder(dec, dom, eps, group, cfg.rotation->samples, master, opts.jobs);
        if (!opts.timings)
            rec.wall_time = 0.0;
        rep.tainted = rep.tainted || rec.flagged();
        xy.emplace_back(eps.get_d(), rec.mean_abs_remainder);
        rep.averages.push_back(rec);
    }
    rep.fits.push_back(detail::fit_series("mean_abs_remainder", xy, rep.theoretical, rep.tolerance));
    detail::settle_verdict(rep);
    rep.total_runtime = opts.timings ? detail::elapsed(t0) : 0.0;
    return rep;
}

/// N_eps against the Weyl-type prediction for every (level, eps), with the
/// lattice-count cross-check recorded per point. One fitted series per level.
inline SweepReport run_spectral(const ExperimentConfig& cfg, const RunOptions& opts = {})
{
    auto t0 = std::chrono::steady_clock::now();
    if (!cfg.spectral)
        throw config_error("spectral run needs a [spectral] section");
    if (cfg.spectral->levels.empty())
        throw config_error("spectral levels list is empty");
    for (const auto& l : cfg.spectral->levels)
        if (l.sign() <= 0)
            throw config_error("spectral levels must be positive");
    auto grid = detail::checked_grid(cfg);
    Decomposition dec = decompose(cfg.subspace());
    Domain dom = cfg.build_domain();
    SweepReport rep;
    rep.kind = ReportKind::spectral;
    detail::fill_header(rep, cfg, dec, dom, opts);
    rep.regime = ExponentRegime::fully_convex;
    rep.theoretical = theoretical_exponent(dec.n, dec.p, dec.q, dec.r, ExponentRegime::fully_convex);
    rep.tolerance = kIndividualTolerance;
    MagneticTorus mt(dec, cfg.spectral->potential);
    CountOptions co{rep.mode, opts.jobs};
    bool cross_ok = true;
    for (const auto& level : cfg.spectral->levels) {
        std::vector<std::pair<double, double>> xy;
        for (const auto& eps : grid) {
            auto ts = std::chrono::steady_clock::now();
            SpectralRecord s;
            s.level = level;
            s.lambda = kFourPiSq * level.to_double();
            s.epsilon = eps;
            CountRecord nc = counting_function(mt, level, eps, co);
            Domain ball = Domain::ball(mt.pulled_back_potential(eps), level);
            CountRecord lc = count_points(dec, ball, eps, co);
            s.counting_value = nc.count;
            s.lattice_count = lc.count;
            s.crosscheck = nc.count == lc.count;
            s.guard_band_hits = nc.guard_band_hits + lc.guard_band_hits;
            s.prediction = weyl_prediction(mt, level.to_double(), eps);
            s.deviation = static_cast<double>(s.counting_value) - s.prediction;
            double epsq = std::pow(eps.get_d(), static_cast<double>(dec.q));
            s.normalized_deviation = epsq * std::fabs(s.deviation);
            s.wall_time = opts.timings ? detail::elapsed(ts) : 0.0;
            rep.tainted = rep.tainted || s.guard_band_hits > 0;
            cross_ok = cross_ok && s.crosscheck;
            xy.emplace_back(eps.get_d(), s.deviation);
            rep.spectra.push_back(s);
        }
        rep.fits.push_back(detail::fit_series("deviation level=" + level.str(), xy, rep.theoretical, rep.tolerance));
    }
    detail::settle_verdict(rep);
    if (rep.verdict && !cross_ok)
        rep.verdict = false;
    rep.total_runtime = opts.timings ? detail::elapsed(t0) : 0.0;
    return rep;
}

/// Plain scan of the full integer box; refuses boxes above 1e8 points.
inline std::int64_t naive_oracle_count(const ExperimentConfig& cfg, const Rational& eps,
                                       std::optional<EvalMode> mode = std::nullopt)
{
    Decomposition dec = decompose(cfg.subspace());
    Domain dom = cfg.build_domain();
    auto box = stretched_box(dec, dom, eps);
    if (box_volume(box) > kOracleLimit)
        throw instance_too_large("oracle: scan box exceeds 1e8 points");
    return naive_count(dec, dom, eps, mode.value_or(cfg.mode)).count;
}

} // namespace aniso

#endif
