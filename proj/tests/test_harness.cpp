#include "aniso/report.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace aniso;
using namespace testing_aniso;

namespace {

const char* kCircle = R"(
[space]
n = 2
f_basis = none
[domain]
shape = ball
center = 0, 0
radius = 1
[sweep]
start = 1/4
ratio = 1/2
count = 5
regime = fully_convex
)";

const char* kLine = R"(
[space]
n = 2
f_basis = 1, 0
[domain]
shape = ball
radius = 1
[sweep]
start = 1/8
ratio = 1/2
count = 4
[spectral]
potential = 0, 0
levels = 7/3, 1/2
)";

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        rows.emplace_back();
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            rows.back().push_back(cell);
    }
    return rows;
}

} // namespace

TEST(Config, ParsesSections)
{
    auto cfg = parse_config(R"(
# comment line
[space]
n = 3
f_basis = 1, 0, sqrt(2); 0, 1, 0   # two rows
discriminant = 2
[domain]
shape = ellipsoid
center = 1/10, 1/5, 0
matrix = 1, 0, 0; 0, 1/4, 0; 0, 0, 2
translation = 1, 0, 0
[sweep]
start = 1/4
ratio = 1/3
count = 4
regime = slicewise_convex
mode = float
seed = 17
[rotation]
group = so_Vperp
samples = 8
seed = 3
[spectral]
potential = 1/2, 0, 0
levels = 1, 5/2
[output]
dir = out
format = csv
)");
    EXPECT_EQ(cfg.n, 3u);
    ASSERT_EQ(cfg.f_rows.size(), 2u);
    EXPECT_EQ(cfg.f_rows[0][2], ExactScalar::sqrt_of(2));
    EXPECT_EQ(cfg.domain.shape, "ellipsoid");
    EXPECT_EQ((*cfg.domain.matrix)(1, 1), ExactScalar(make_rational(1, 4)));
    EXPECT_EQ(cfg.regime, ExponentRegime::slicewise_convex);
    EXPECT_EQ(cfg.mode, EvalMode::floating);
    EXPECT_EQ(cfg.seed, 17u);
    EXPECT_EQ(cfg.rotation->group, GroupKind::so_vperp);
    EXPECT_EQ(cfg.rotation->samples, 8u);
    EXPECT_EQ(cfg.spectral->levels.size(), 2u);
    EXPECT_EQ(cfg.out_dir, "out");
    EXPECT_EQ(cfg.format, "csv");
    auto grid = cfg.epsilon_grid();
    EXPECT_EQ(grid, (std::vector<Rational>{make_rational(1, 4), make_rational(1, 12), make_rational(1, 36),
                                           make_rational(1, 108)}));
    Domain d = cfg.build_domain();
    EXPECT_TRUE(d.exact_available());
    EXPECT_EQ(d.world_center_exact(), ev({"11/10", "1/5", "0"}));
}

TEST(Config, Defaults)
{
    auto cfg = parse_config("[space]\nn = 2\n[domain]\nshape = ball\nradius = 1\n");
    EXPECT_TRUE(cfg.f_rows.empty());
    EXPECT_EQ(cfg.grid_start, make_rational(1, 8));
    EXPECT_EQ(cfg.grid_ratio, make_rational(1, 2));
    EXPECT_EQ(cfg.grid_count, 8u);
    EXPECT_EQ(cfg.mode, EvalMode::exact);
    EXPECT_EQ(cfg.domain.center, ev({"0", "0"}));
}

TEST(Config, RotationAnglesGiveAFloatPose)
{
    auto cfg = parse_config("[space]\nn = 3\n[domain]\nshape = lpball\nradius = 1\nexponent = 4\n"
                            "rotation_angles = 0.3, -0.2, 1.1\n");
    Domain d = cfg.build_domain();
    EXPECT_FALSE(d.exact_available());
    EXPECT_NEAR((d.rotation().transpose() * d.rotation() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(),
                0.0, 1e-14);
    EXPECT_THROW(parse_config("[space]\nn = 3\n[domain]\nshape = ball\nradius = 1\nrotation_angles = 0.3\n")
                     .build_domain(),
                 config_error);
}

TEST(Config, Errors)
{
    EXPECT_THROW(parse_config("[space]\nn = 2\n[domain]\nshape = cube\n"), config_error);
    EXPECT_THROW(parse_config("[space]\nn = 2\nbogus = 1\n[domain]\nshape = ball\nradius = 1\n"), config_error);
    EXPECT_THROW(parse_config("[nowhere]\n"), config_error);
    EXPECT_THROW(parse_config("n = 2\n"), config_error);
    EXPECT_THROW(parse_config("[domain]\nshape = ball\n"), config_error);
    EXPECT_THROW(parse_config("[space]\nn = 2\nn = 3\n"), config_error);
    EXPECT_THROW(parse_config("[space]\nn = 2\nf_basis = 1, 2, 3\n[domain]\nshape = ball\nradius = 1\n"),
                 config_error);
    EXPECT_THROW(parse_config("[space]\nn = 2\n[domain]\nshape = ball\nradius = 1\n[sweep]\nratio = 2\n"),
                 config_error);
    EXPECT_THROW(parse_config("[space]\nn = 2\n[domain]\nshape = ball\nradius = 1\n[sweep]\nstart = sqrt(2)\n"),
                 config_error);
    EXPECT_THROW(parse_config("[space]\nn = 2\n[domain]\nshape = ellipsoid\n").build_domain(), config_error);
    EXPECT_THROW(parse_config("[space]\nn = 2\nf_basis = 1, sqrt(2)\ndiscriminant = 3\n[domain]\nshape = ball\n"
                              "radius = 1\n")
                     .subspace(),
                 config_error);
    EXPECT_THROW(load_config("/nonexistent/file.cfg"), config_error);
}

TEST(Config, SampleConfigsParse)
{
    for (const auto& entry : std::filesystem::directory_iterator(std::string(ANISO_SOURCE_DIR) + "/configs")) {
        auto cfg = load_config(entry.path().string());
        EXPECT_NO_THROW(cfg.build_domain()) << entry.path();
        EXPECT_NO_THROW(decompose(cfg.subspace())) << entry.path();
    }
}

TEST(FitExponents, PowerLaw)
{
    std::vector<std::pair<double, double>> s;
    for (int j = 3; j <= 10; ++j) {
        double e = std::ldexp(1.0, -j);
        s.emplace_back(e, std::pow(e, -0.5));
    }
    auto fit = fit_exponents(s);
    EXPECT_NEAR(fit.ls_slope, -0.5, 1e-12);
    EXPECT_NEAR(fit.envelope_slope, -0.5, 1e-12);
}

TEST(FitExponents, PlantedSlopesToHighAccuracy)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 20; ++t) {
        double a = u(rng), c = std::exp(u(rng));
        std::vector<std::pair<double, double>> s;
        for (int j = 0; j < 9; ++j) {
            double e = 0.3 * std::pow(0.6, j);
            s.emplace_back(e, -c * std::pow(e, a));
        }
        auto fit = fit_exponents(s);
        EXPECT_NEAR(fit.ls_slope, a, 1e-10);
        if (a < 0) {
            EXPECT_NEAR(fit.envelope_slope, a, 1e-10);
        }
    }
}

TEST(FitExponents, OscillatingSeriesEnvelope)
{
    std::vector<std::pair<double, double>> s;
    for (int j = 3; j <= 10; ++j) {
        double e = std::ldexp(1.0, -j);
        s.emplace_back(e, std::pow(e, -0.5) * (2.0 + std::sin(1.0 / e)));
    }
    auto fit = fit_exponents(s);
    EXPECT_NEAR(fit.envelope_slope, -0.5, 0.1);
}

TEST(FitExponents, ConstantAndZeros)
{
    std::vector<std::pair<double, double>> s{{0.5, 7}, {0.25, 7}, {0.125, 0}, {0.0625, -7}};
    auto fit = fit_exponents(s);
    EXPECT_NEAR(fit.ls_slope, 0.0, 1e-15);
    EXPECT_NEAR(fit.envelope_slope, 0.0, 1e-15);
    EXPECT_EQ(fit.zeros, 1u);
    EXPECT_EQ(fit.used, 3u);
    EXPECT_THROW(fit_exponents({{0.5, 1}, {0.25, 0}, {0.125, 2}}), insufficient_data);
}

TEST(RunSweep, CircleAgreesWithTheOracle)
{
    auto cfg = parse_config(kCircle);
    auto rep = run_sweep(cfg);
    ASSERT_EQ(rep.counts.size(), 5u);
    EXPECT_FALSE(rep.tainted);
    EXPECT_EQ(rep.theoretical, make_rational(-2, 3));
    ASSERT_TRUE(rep.verdict.has_value());
    EXPECT_EQ(recompute_verdict(rep), rep.verdict);
    for (const auto& r : rep.counts)
        EXPECT_EQ(r.count, naive_oracle_count(cfg, r.epsilon));
}

TEST(RunSweep, TooShortGrid)
{
    auto cfg = parse_config(kCircle);
    cfg.grid_count = 2;
    EXPECT_THROW(run_sweep(cfg), insufficient_data);
}

TEST(RunSweep, FloatModeBoundaryHitsTaintTheReport)
{
    // radius 5 at eps = 1: (3,4) and friends lie on the circle
    auto cfg = parse_config("[space]\nn = 2\n[domain]\nshape = ball\nradius = 5\n[sweep]\nstart = 1\ncount = 3\n"
                            "mode = float\n");
    auto rep = run_sweep(cfg);
    EXPECT_TRUE(rep.tainted);
    EXPECT_FALSE(rep.verdict.has_value());
    auto exact = run_sweep(cfg, RunOptions{1, false, EvalMode::exact, std::nullopt});
    EXPECT_FALSE(exact.tainted);
}

TEST(RunAverageSweep, CenteredBallMatchesPlainSweep)
{
    auto cfg = parse_config(std::string(kCircle) + "[rotation]\ngroup = so_full\nsamples = 4\nseed = 5\n");
    auto plain = run_sweep(cfg);
    auto avg = run_average_sweep(cfg);
    ASSERT_EQ(avg.averages.size(), plain.counts.size());
    for (std::size_t i = 0; i < avg.averages.size(); ++i) {
        EXPECT_NEAR(avg.averages[i].mean_abs_remainder, std::fabs(plain.counts[i].remainder), 1e-9);
        EXPECT_NEAR(avg.averages[i].std_error, 0.0, 1e-9);
    }
    EXPECT_NEAR(avg.fits[0].fit->envelope_slope, plain.fits[0].fit->envelope_slope, 1e-9);
    EXPECT_EQ(avg.tolerance, 0.25);
}

TEST(RunAverageSweep, RejectsMissingOrSingleSample)
{
    EXPECT_THROW(run_average_sweep(parse_config(kCircle)), config_error);
    auto cfg = parse_config(std::string(kCircle) + "[rotation]\ngroup = so_full\nsamples = 1\nseed = 5\n");
    EXPECT_THROW(run_average_sweep(cfg), config_error);
}

TEST(RunSpectral, CrosschecksHold)
{
    auto rep = run_spectral(parse_config(kLine));
    ASSERT_EQ(rep.spectra.size(), 8u);
    for (const auto& s : rep.spectra) {
        EXPECT_TRUE(s.crosscheck);
        EXPECT_EQ(s.counting_value, s.lattice_count);
        EXPECT_NEAR(s.normalized_deviation, s.epsilon.get_d() * std::fabs(s.deviation), 1e-12);
    }
    EXPECT_EQ(rep.fits.size(), 2u);
    EXPECT_EQ(rep.theoretical, Rational(0));
    EXPECT_EQ(recompute_verdict(rep), rep.verdict);
}

TEST(RunSpectral, RejectsEmptyLevels)
{
    auto cfg = parse_config(kLine);
    cfg.spectral->levels.clear();
    EXPECT_THROW(run_spectral(cfg), config_error);
    EXPECT_THROW(run_spectral(parse_config(kCircle)), config_error);
}

TEST(NaiveOracle, Examples)
{
    auto gauss = parse_config("[space]\nn = 2\n[domain]\nshape = ball\nradius = 10\n");
    EXPECT_EQ(naive_oracle_count(gauss, Rational(1)), 305);
    auto empty = parse_config("[space]\nn = 2\n[domain]\nshape = ball\ncenter = 1/2, 1/2\nradius = 1/10\n");
    EXPECT_EQ(naive_oracle_count(empty, Rational(1)), 0);
    auto big = parse_config("[space]\nn = 3\n[domain]\nshape = ball\nradius = 1\n");
    EXPECT_THROW(naive_oracle_count(big, make_rational(1, 1000)), instance_too_large);
}

TEST(NaiveOracle, MatchesPrunedCountsOnConfigs)
{
    std::mt19937_64 rng(99);
    const char* shapes[3] = {"shape = ball\nradius = %R\n", "shape = ellipsoid\nmatrix = %Q\n",
                             "shape = lpball\nradius = %R\nexponent = 4\n"};
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 1 + t % 3;
        std::ostringstream cfg;
        cfg << "[space]\nn = " << n << "\n";
        if (n > 1 && t % 2 == 0) {
            cfg << "f_basis = 1";
            for (std::size_t i = 1; i < n; ++i)
                cfg << ", " << (i == 1 ? "sqrt(2)" : "1/3");
            cfg << "\n";
        }
        std::string dom = shapes[(t / 3) % 3];
        std::string r = std::to_string(1 + rng() % 3) + "/2";
        std::string q;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j)
                q += (j ? ", " : "") + std::string(i == j ? std::to_string(1 + rng() % 3) : "0");
            q += i + 1 < n ? "; " : "";
        }
        auto sub = [](std::string s, const std::string& key, const std::string& val) {
            auto p = s.find(key);
            if (p != std::string::npos)
                s.replace(p, key.size(), val);
            return s;
        };
        dom = sub(sub(dom, "%R", r), "%Q", q);
        cfg << "[domain]\n" << dom << "center = 1/3";
        for (std::size_t i = 1; i < n; ++i)
            cfg << ", -1/5";
        cfg << "\n";
        auto c = parse_config(cfg.str());
        Rational eps = make_rational(1, 1L << (rng() % 5));
        Decomposition dec = decompose(c.subspace());
        EXPECT_EQ(naive_oracle_count(c, eps), count_points(dec, c.build_domain(), eps).count) << cfg.str();
    }
}

TEST(EmitReport, CsvHeadersAndRoundTrip)
{
    auto rep = run_sweep(parse_config(kCircle));
    std::string csv = report_to_csv(rep);
    auto rows = csv_rows(csv);
    ASSERT_EQ(rows.size(), rep.counts.size() + 1);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "epsilon,count,main_term,remainder,abs_remainder,guard_hits,wall_time");
    auto j = report_to_json(rep);
    for (std::size_t i = 0; i < rep.counts.size(); ++i) {
        const auto& rec = j["records"][i];
        EXPECT_EQ(rows[i + 1][0], rec["epsilon"].get<std::string>());
        EXPECT_EQ(std::stoll(rows[i + 1][1]), rec["count"].get<std::int64_t>());
        EXPECT_EQ(std::stod(rows[i + 1][2]), rec["main_term"].get<double>());
        EXPECT_EQ(std::stod(rows[i + 1][3]), rec["remainder"].get<double>());
        EXPECT_EQ(std::stod(rows[i + 1][3]), rep.counts[i].remainder);
    }
    EXPECT_EQ(j["version"], ANISO_VERSION);
    EXPECT_EQ(j["kind"], "sweep");
}

TEST(EmitReport, AverageAndSpectralColumns)
{
    auto avg = run_average_sweep(parse_config(std::string(kCircle) + "[rotation]\ngroup = so_full\nsamples = 3\nseed = 1\n"));
    std::string a = report_to_csv(avg);
    EXPECT_EQ(a.substr(0, a.find('\n')),
              "epsilon,count,main_term,remainder,abs_remainder,guard_hits,wall_time,mean_abs_r,std_error,n_samples");
    auto j = report_to_json(avg);
    EXPECT_EQ(j["records"][0]["seeds"].size(), 3u);
    EXPECT_EQ(j["records"][0]["seeds"][1].get<std::uint64_t>(), sample_seed(1, 1));

    auto spec = run_spectral(parse_config(kLine));
    std::string s = report_to_csv(spec);
    EXPECT_EQ(s.substr(0, s.find('\n')), "epsilon,count,main_term,remainder,abs_remainder,guard_hits,wall_time,"
                                         "lambda,N_eps,prediction,deviation,crosscheck");
    EXPECT_EQ(csv_rows(s).size(), spec.spectra.size() + 1);
}

TEST(EmitReport, PlotdataIsLogPairs)
{
    auto rep = run_sweep(parse_config(kCircle));
    std::string p = report_to_plotdata(rep);
    std::istringstream in(p);
    std::string line;
    int pairs = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        double x, y;
        ASSERT_TRUE(static_cast<bool>(ls >> x >> y)) << line;
        ++pairs;
    }
    EXPECT_GE(pairs, 2 * 3);
    EXPECT_NE(p.find("# abs_remainder\n"), std::string::npos);
}

TEST(EmitReport, DeterministicAcrossJobsAndRuns)
{
    auto cfg = parse_config(kCircle);
    std::string a = report_to_json(run_sweep(cfg, {1, false, std::nullopt, std::nullopt})).dump(2);
    std::string b = report_to_json(run_sweep(cfg, {8, false, std::nullopt, std::nullopt})).dump(2);
    EXPECT_EQ(a, b);
    auto acfg = parse_config(std::string(kCircle) + "[rotation]\ngroup = so_full\nsamples = 4\nseed = 5\n");
    std::string c = report_to_json(run_average_sweep(acfg, {1, false, std::nullopt, std::nullopt})).dump(2);
    std::string d = report_to_json(run_average_sweep(acfg, {8, false, std::nullopt, std::nullopt})).dump(2);
    EXPECT_EQ(c, d);
}

TEST(EmitReport, LocaleIndependent)
{
    auto rep = run_sweep(parse_config(kCircle));
    std::string before = report_to_csv(rep);
    std::locale old = std::locale::global(std::locale::classic());
    try {
        std::locale::global(std::locale("de_DE.UTF-8"));
    } catch (const std::runtime_error&) {
    }
    std::string after = report_to_csv(rep);
    std::locale::global(old);
    EXPECT_EQ(before, after);
    EXPECT_EQ(before.find(';'), std::string::npos);
}

TEST(EmitReport, WritesFilesAndReportsErrors)
{
    auto rep = run_sweep(parse_config(kCircle));
    auto dir = std::filesystem::temp_directory_path() / "aniso_report_test";
    std::filesystem::remove_all(dir);
    auto p = emit_report(rep, "json", dir);
    EXPECT_EQ(p.filename(), "sweep.json");
    auto parsed = nlohmann::json::parse(slurp(p));
    EXPECT_EQ(parsed["records"].size(), rep.counts.size());
    EXPECT_EQ(slurp(emit_report(rep, "csv", dir)), report_to_csv(rep));
    EXPECT_THROW(emit_report(rep, "json", "/proc/aniso_forbidden"), report_io_error);
    EXPECT_THROW(emit_report(rep, "xml", dir), std::invalid_argument);
    std::filesystem::remove_all(dir);
}
