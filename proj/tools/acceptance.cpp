#include "aniso/report.hpp"
#include "aniso/spectral.hpp"
#include "helpers.hpp"
#include "instances.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace aniso;
using namespace testing_aniso;

namespace {

// pinned tolerances and budgets
constexpr double kOrthoTolerance = 1e-10;
constexpr double kKsCritical = 1.6276; // asymptotic 1% critical value, scaled by 1/sqrt(n)
constexpr double kDeviationRatio = 10.0;
constexpr int kRandomSubspaces = 20;
constexpr int kSpectralTrials = 100;
constexpr int kOracleInstances = 60;
constexpr int kHaarSamples = 2000;

const std::string kConfigDir = std::string(ANISO_SOURCE_DIR) + "/configs/";

struct Outcome
{
    bool pass = true;
    std::string detail;
};

ExperimentConfig circle_config()
{
    auto cfg = load_config(kConfigDir + "gauss_circle.cfg");
    cfg.grid_start = make_rational(1, 16);
    cfg.grid_ratio = make_rational(1, 2);
    cfg.grid_count = 7;
    return cfg;
}

ExperimentConfig kronecker_config()
{
    auto cfg = load_config(kConfigDir + "kronecker_line.cfg");
    cfg.grid_start = make_rational(1, 16);
    cfg.grid_ratio = make_rational(1, 2);
    cfg.grid_count = 7;
    return cfg;
}

ExperimentConfig adiabatic_config()
{
    auto cfg = load_config(kConfigDir + "adiabatic_line.cfg");
    cfg.grid_start = make_rational(1, 8);
    cfg.grid_ratio = make_rational(1, 2);
    cfg.grid_count = 8;
    cfg.spectral->potential = ExactVector{ExactScalar(), ExactScalar()};
    cfg.spectral->levels = {ExactScalar(make_rational(7, 3))};
    return cfg;
}

ExperimentConfig ellipse_config()
{
    auto cfg = load_config(kConfigDir + "ellipse_average.cfg");
    cfg.grid_start = make_rational(1, 16);
    cfg.grid_ratio = make_rational(1, 2);
    cfg.grid_count = 6;
    cfg.rotation->group = GroupKind::so_full;
    cfg.rotation->samples = 64;
    return cfg;
}

std::string slope_text(const SweepReport& rep)
{
    auto os = detail::classic_stream();
    os << std::setprecision(4);
    for (const auto& f : rep.fits) {
        if (f.fit)
            os << "envelope slope " << f.fit->envelope_slope << " vs bound " << rep.theoretical.get_d() + rep.tolerance;
        else
            os << f.error;
    }
    return os.str();
}

Outcome check_sweep(const SweepReport& rep)
{
    Outcome o;
    o.pass = !rep.tainted && rep.verdict.value_or(false);
    o.detail = slope_text(rep);
    if (rep.tainted)
        o.detail += ", tainted";
    return o;
}

Outcome criterion_circle()
{
    auto cfg = circle_config();
    auto rep = run_sweep(cfg);
    Outcome o = check_sweep(rep);
    int mismatches = 0;
    for (const auto& r : rep.counts)
        if (naive_oracle_count(cfg, r.epsilon) != r.count)
            ++mismatches;
    o.pass = o.pass && mismatches == 0;
    o.detail += ", naive mismatches " + std::to_string(mismatches);
    return o;
}

Outcome criterion_kronecker() { return check_sweep(run_sweep(kronecker_config())); }

Outcome criterion_structure()
{
    std::mt19937_64 rng(303);
    int done = 0, failures = 0;
    while (done < kRandomSubspaces) {
        std::size_t n = 2 + rng() % 3;
        std::size_t p = rng() % n;
        Decomposition dec;
        try {
            dec = decompose(SubspaceSpec::from_vectors(n, random_rational_rows(rng, n, p)));
        } catch (const dependent_basis&) {
            continue;
        }
        ++done;
        bool ok = dec.r == dec.p;
        ok = ok && covolume_sq(dec.gamma_perp_basis) == dec.covol_sq;
        if (dec.r > 0) {
            ok = ok && covolume_sq(dec.gamma_basis) == dec.covol_sq;
            ok = ok && dec.gamma_star_basis.transpose() * to_rational(dec.gamma_basis) == RationalMatrix::identity(dec.r);
            ok = ok && dec.gamma_star_gram * rational_gram(dec.gamma_basis) == RationalMatrix::identity(dec.r);
        }
        ExactVector center;
        for (std::size_t i = 0; i < n; ++i)
            center.push_back(random_rational(rng, 3, 5));
        Domain ball = Domain::ball(center, ExactScalar(make_rational(1, 2)));
        for (Rational eps : {make_rational(1, 4), make_rational(1, 16)}) {
            std::int64_t total = count_points(dec, ball, eps).count, sum = 0;
            for (const auto& [g, c] : count_points_by_fiber(dec, ball, eps, EvalMode::exact))
                sum += c;
            ok = ok && total == sum;
        }
        if (!ok)
            ++failures;
    }
    return {failures == 0, std::to_string(done) + " subspaces, failures " + std::to_string(failures)};
}

Outcome criterion_spectral()
{
    std::mt19937_64 rng(404);
    int disagreements = 0;
    for (int t = 0; t < kSpectralTrials; ++t) {
        std::size_t n = 2 + rng() % 2;
        std::vector<ExactVector> rows;
        if (rng() % 2) {
            ExactVector v{ExactScalar(1), ExactScalar::sqrt_of(2)};
            if (n == 3)
                v.push_back(random_rational(rng, 2, 3));
            rows.push_back(v);
        } else {
            rows = random_rational_rows(rng, n, 1 + rng() % (n - 1));
        }
        Decomposition dec;
        try {
            dec = decompose(SubspaceSpec::from_vectors(n, rows));
        } catch (const std::exception&) {
            --t;
            continue;
        }
        ExactVector a(n);
        for (std::size_t j = 0; j < dec.p; ++j) {
            ExactScalar c = random_rational(rng, 3, 4);
            for (std::size_t i = 0; i < n; ++i)
                a[i] += c * dec.f_basis(i, j);
        }
        MagneticTorus mt(dec, a);
        ExactScalar level(make_rational(1 + static_cast<long>(rng() % 20), 1 + static_cast<long>(rng() % 4)));
        Rational eps = make_rational(1, 1L << (1 + rng() % 4));
        if (!crosscheck_identity(mt, level, eps).agree)
            ++disagreements;
    }
    auto rep = run_spectral(adiabatic_config());
    double first = 0, worst = 0;
    for (const auto& s : rep.spectra) {
        if (s.epsilon == make_rational(1, 8))
            first = std::fabs(s.deviation);
        worst = std::max(worst, std::fabs(s.deviation));
    }
    Outcome o;
    o.pass = disagreements == 0 && !rep.tainted && rep.verdict.value_or(false) && worst <= kDeviationRatio * first;
    auto os = detail::classic_stream();
    os << std::setprecision(4) << kSpectralTrials << " crosschecks, disagreements " << disagreements
       << ", max|dev| " << worst << " vs " << kDeviationRatio << "x" << first << ", " << slope_text(rep);
    o.detail = os.str();
    return o;
}

Outcome criterion_average()
{
    auto rep = run_average_sweep(ellipse_config());
    Outcome o = check_sweep(rep);
    auto os = detail::classic_stream();
    os << std::setprecision(3) << ", std_error";
    for (const auto& a : rep.averages)
        os << ' ' << a.std_error;
    o.detail += os.str();
    return o;
}

Outcome criterion_oracle()
{
    std::mt19937_64 rng(606);
    int compared = 0, mismatches = 0;
    for (int t = 0; compared < kOracleInstances; ++t) {
        Instance inst = random_instance(rng, t);
        auto pruned = count_points(inst.dec, inst.dom, inst.eps, {inst.mode, 1});
        auto naive = naive_count(inst.dec, inst.dom, inst.eps, inst.mode);
        if (pruned.guard_band_hits > 0 || naive.guard_band_hits > 0)
            continue;
        ++compared;
        if (pruned.count != naive.count)
            ++mismatches;
    }
    return {mismatches == 0, std::to_string(compared) + " instances, mismatches " + std::to_string(mismatches)};
}

Outcome criterion_haar()
{
    auto plane = decompose(SubspaceSpec::trivial(2));
    auto g2 = RotationGroup::of(GroupKind::so_full, plane);
    std::vector<double> u(kHaarSamples);
    for (int i = 0; i < kHaarSamples; ++i) {
        Eigen::MatrixXd h = sample_rotation(g2, sample_seed(12345, static_cast<std::uint64_t>(i)));
        double a = std::atan2(h(1, 0), h(0, 0));
        if (a < 0)
            a += 2 * std::numbers::pi;
        u[i] = a / (2 * std::numbers::pi);
    }
    std::sort(u.begin(), u.end());
    double ks = 0;
    for (int i = 0; i < kHaarSamples; ++i)
        ks = std::max({ks, (i + 1.0) / kHaarSamples - u[i], u[i] - static_cast<double>(i) / kHaarSamples});
    double critical = kKsCritical / std::sqrt(static_cast<double>(kHaarSamples));

    auto dec = decompose(SubspaceSpec::from_vectors(4, {ev({"1", "0", "1", "0"}), ev({"0", "1", "0", "sqrt(2)"})}));
    double worst = 0;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    for (GroupKind k : {GroupKind::so_h, GroupKind::so_vperp, GroupKind::so_full}) {
        auto g = RotationGroup::of(k, dec);
        for (std::uint64_t s = 0; s < 200; ++s) {
            Eigen::MatrixXd h = sample_rotation(g, sample_seed(7, s));
            worst = std::max(worst, (h.transpose() * h - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff());
            worst = std::max(worst, std::fabs(h.determinant() - 1.0));
            Eigen::VectorXd fixed;
            if (k == GroupKind::so_h) {
                Eigen::VectorXd a(dec.p);
                for (auto& x : a)
                    x = z(rng);
                fixed = dec.frame_f * a;
            } else if (k == GroupKind::so_vperp) {
                Eigen::VectorXd b(dec.r);
                for (auto& x : b)
                    x = z(rng);
                fixed = dec.frame_v * b;
            }
            if (fixed.size() > 0)
                worst = std::max(worst, (h * fixed - fixed).cwiseAbs().maxCoeff());
        }
    }
    auto os = detail::classic_stream();
    os << std::setprecision(3) << "KS " << ks << " vs " << critical << ", max orthogonality/fixing error " << worst;
    return {ks < critical && worst <= kOrthoTolerance, os.str()};
}

Outcome criterion_determinism()
{
    int differing = 0, compared = 0;
    auto same = [&](const std::function<SweepReport(const RunOptions&)>& run) {
        std::string a = report_to_json(run({1, false, std::nullopt, std::nullopt})).dump(2);
        std::string b = report_to_json(run({1, false, std::nullopt, std::nullopt})).dump(2);
        std::string c = report_to_json(run({8, false, std::nullopt, std::nullopt})).dump(2);
        compared += 2;
        differing += (a != b) + (a != c);
    };
    same([](const RunOptions& o) { return run_sweep(circle_config(), o); });
    same([](const RunOptions& o) { return run_sweep(kronecker_config(), o); });
    same([](const RunOptions& o) { return run_spectral(adiabatic_config(), o); });
    same([](const RunOptions& o) { return run_average_sweep(ellipse_config(), o); });
    return {differing == 0, std::to_string(compared) + " report comparisons, differing " + std::to_string(differing)};
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        const char* name;
        double budget; // seconds
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "circle sweep", 60, criterion_circle},
        {2, "kronecker line sweep", 60, criterion_kronecker},
        {3, "lattice structure and fiber additivity", 600, criterion_structure},
        {4, "spectral identity and adiabatic limit", 120, criterion_spectral},
        {5, "rotation-averaged ellipse", 600, criterion_average},
        {6, "pruned vs naive enumeration", 600, criterion_oracle},
        {7, "haar sampling", 600, criterion_haar},
        {8, "report determinism", 600, criterion_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget) {
            o.pass = false;
            o.detail += ", over time budget";
        }
        failed += !o.pass;
        auto os = detail::classic_stream();
        os << std::fixed << std::setprecision(2) << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " ("
           << c.name << "): " << o.detail << " [" << secs << " s]";
        std::cout << os.str() << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
