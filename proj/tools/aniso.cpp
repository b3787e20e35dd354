#include "aniso/report.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

using namespace aniso;

namespace {

struct Flags
{
    std::string config;
    std::string eps;
    std::string mode;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    unsigned jobs = 1;
    bool timings = false;
};

RunOptions run_options(const Flags& f)
{
    RunOptions o;
    o.jobs = f.jobs == 0 ? 1 : f.jobs;
    o.timings = f.timings;
    if (f.mode == "exact")
        o.mode = EvalMode::exact;
    else if (f.mode == "float")
        o.mode = EvalMode::floating;
    o.seed = f.seed;
    return o;
}

Rational parse_eps(const std::string& s)
{
    ExactScalar e = parse_exact(s);
    if (!e.is_rational() || e.sign() <= 0)
        throw std::invalid_argument("--eps must be a positive rational");
    return e.rational_part();
}

void print_record(const CountRecord& r)
{
    auto os = detail::classic_stream();
    os << "epsilon = " << to_string(r.epsilon) << "\n"
       << "count = " << r.count << "\n"
       << "main_term = " << r.main_term << "\n"
       << "remainder = " << r.remainder << "\n"
       << "guard_hits = " << r.guard_band_hits << "\n"
       << "boundary_hits = " << r.boundary_hits << "\n"
       << "points_scanned = " << r.points_scanned << "\n";
    std::cout << os.str();
}

int finish_report(const SweepReport& rep, const ExperimentConfig& cfg, const Flags& f)
{
    std::string format = f.format.empty() ? cfg.format : f.format;
    std::string dir = f.out.empty() ? cfg.out_dir : f.out;
    if (dir.empty())
        std::cout << render_report(rep, format);
    else
        std::cerr << "wrote " << emit_report(rep, format, dir).string() << "\n";
    auto os = detail::classic_stream();
    os << std::setprecision(6) << to_string(rep.kind) << ": theoretical " << to_string(rep.theoretical) << " + " << rep.tolerance;
    for (const auto& s : rep.fits) {
        os << "; " << s.label << ": ";
        if (s.fit)
            os << "envelope slope " << s.fit->envelope_slope << ", ls slope " << s.fit->ls_slope;
        else
            os << s.error;
    }
    os << "; verdict " << (rep.verdict ? (*rep.verdict ? "true" : "false") : "withheld");
    if (rep.tainted)
        os << " (tainted: guard band hits)";
    std::cerr << os.str() << "\n";
    return rep.tainted ? 2 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"anisotropic lattice point counting"};
    app.require_subcommand(1);
    Flags f;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", f.config, "experiment config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--mode", f.mode, "exact or float")->check(CLI::IsMember({"exact", "float"}));
        sub->add_option("--seed", f.seed, "master seed");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--format", f.format, "csv, json or plotdata")
            ->check(CLI::IsMember({"csv", "json", "plotdata"}));
        sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--timings", f.timings, "record wall clock times");
    };
    auto* dec_cmd = app.add_subcommand("decompose", "print the subspace decomposition");
    add_common(dec_cmd);
    auto* count_cmd = app.add_subcommand("count", "count points of T_eps(S)");
    add_common(count_cmd);
    count_cmd->add_option("--eps", f.eps, "epsilon (rational)")->required();
    auto* sweep_cmd = app.add_subcommand("sweep", "remainder sweep over the epsilon grid");
    add_common(sweep_cmd);
    auto* avg_cmd = app.add_subcommand("average", "rotation-averaged remainder sweep");
    add_common(avg_cmd);
    auto* spec_cmd = app.add_subcommand("spectral", "eigenvalue counting against the Weyl prediction");
    add_common(spec_cmd);
    auto* oracle_cmd = app.add_subcommand("oracle", "naive full-box count");
    add_common(oracle_cmd);
    oracle_cmd->add_option("--eps", f.eps, "epsilon (rational)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        ExperimentConfig cfg = load_config(f.config);
        RunOptions opts = run_options(f);
        if (dec_cmd->parsed()) {
            std::cout << decomposition_report(decompose(cfg.subspace()));
            return 0;
        }
        if (count_cmd->parsed()) {
            Decomposition dec = decompose(cfg.subspace());
            Domain dom = cfg.build_domain();
            CountOptions co{opts.mode.value_or(cfg.mode), opts.jobs};
            CountRecord rec = remainder(dec, dom, parse_eps(f.eps), co, opts.seed.value_or(cfg.seed));
            print_record(rec);
            return rec.flagged() ? 2 : 0;
        }
        if (oracle_cmd->parsed()) {
            Rational eps = parse_eps(f.eps);
            std::int64_t naive = naive_oracle_count(cfg, eps, opts.mode);
            Decomposition dec = decompose(cfg.subspace());
            CountOptions co{opts.mode.value_or(cfg.mode), opts.jobs};
            std::int64_t pruned = count_points(dec, cfg.build_domain(), eps, co).count;
            std::cout << "naive = " << naive << "\npruned = " << pruned << "\n";
            if (naive != pruned) {
                std::cerr << "error: pruned enumeration disagrees with the naive scan\n";
                return 1;
            }
            return 0;
        }
        if (sweep_cmd->parsed())
            return finish_report(run_sweep(cfg, opts), cfg, f);
        if (avg_cmd->parsed())
            return finish_report(run_average_sweep(cfg, opts), cfg, f);
        if (spec_cmd->parsed())
            return finish_report(run_spectral(cfg, opts), cfg, f);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
