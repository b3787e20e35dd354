#ifndef ANISO_REPORT_HPP
#define ANISO_REPORT_HPP

#include "harness.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <sstream>
#include <stdexcept>
#include <string>

namespace aniso {

class report_io_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ostringstream classic_stream()
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    return os;
}

inline std::string mode_name(EvalMode m) { return m == EvalMode::exact ? "exact" : "float"; }

inline nlohmann::json fit_json(const SeriesFit& s)
{
    nlohmann::json j;
    j["label"] = s.label;
    if (s.fit) {
        j["ls_slope"] = s.fit->ls_slope;
        j["envelope_slope"] = s.fit->envelope_slope;
        j["points_used"] = s.fit->used;
        j["zero_remainders"] = s.fit->zeros;
    } else {
        j["error"] = s.error;
    }
    j["verdict"] = s.verdict ? nlohmann::json(*s.verdict) : nlohmann::json(nullptr);
    return j;
}

} // namespace detail

inline nlohmann::json report_to_json(const SweepReport& rep)
{
    using nlohmann::json;
    json j;
    j["tool"] = "aniso";
    j["version"] = rep.version;
    j["kind"] = to_string(rep.kind);
    json cfg;
    cfg["source"] = rep.config_source;
    cfg["n"] = rep.n;
    cfg["p"] = rep.p;
    cfg["q"] = rep.q;
    cfg["r"] = rep.r;
    cfg["discriminant"] = rep.discriminant;
    cfg["shape"] = rep.shape;
    cfg["mode"] = detail::mode_name(rep.mode);
    cfg["regime"] = to_string(rep.regime);
    cfg["seed"] = rep.seed;
    if (rep.rotation) {
        cfg["rotation"] = {{"group", to_string(rep.rotation->group)},
                           {"samples", rep.rotation->samples},
                           {"seed", rep.rotation->seed}};
    }
    j["config"] = cfg;

    json recs = json::array();
    for (const auto& c : rep.counts) {
        recs.push_back({{"epsilon", to_string(c.epsilon)},
                        {"epsilon_value", c.epsilon.get_d()},
                        {"count", c.count},
                        {"main_term", c.main_term},
                        {"main_term_error", c.main_term_error},
                        {"remainder", c.remainder},
                        {"abs_remainder", std::fabs(c.remainder)},
                        {"guard_hits", c.guard_band_hits},
                        {"boundary_hits", c.boundary_hits},
                        {"points_scanned", c.points_scanned},
                        {"wall_time", c.wall_time}});
    }
    for (const auto& a : rep.averages) {
        recs.push_back({{"epsilon", to_string(a.epsilon)},
                        {"epsilon_value", a.epsilon.get_d()},
                        {"count", a.mean_count},
                        {"main_term", a.main_term},
                        {"remainder", a.mean_remainder},
                        {"abs_remainder", a.mean_abs_remainder},
                        {"guard_hits", a.guard_band_hits},
                        {"wall_time", a.wall_time},
                        {"mean_abs_r", a.mean_abs_remainder},
                        {"std_error", a.std_error},
                        {"n_samples", a.samples},
                        {"seeds", a.seeds},
                        {"sample_counts", a.counts},
                        {"sample_remainders", a.remainders}});
    }
    for (const auto& s : rep.spectra) {
        recs.push_back({{"epsilon", to_string(s.epsilon)},
                        {"epsilon_value", s.epsilon.get_d()},
                        {"level", s.level.str()},
                        {"lambda", s.lambda},
                        {"N_eps", s.counting_value},
                        {"prediction", s.prediction},
                        {"deviation", s.deviation},
                        {"normalized_deviation", s.normalized_deviation},
                        {"crosscheck", s.crosscheck},
                        {"lattice_count", s.lattice_count},
                        {"guard_hits", s.guard_band_hits},
                        {"wall_time", s.wall_time}});
    }
    j["records"] = recs;

    json fits = json::array();
    for (const auto& f : rep.fits)
        fits.push_back(detail::fit_json(f));
    j["fits"] = fits;
    if (rep.fits.size() == 1 && rep.fits.front().fit) {
        j["ls_slope"] = rep.fits.front().fit->ls_slope;
        j["envelope_slope"] = rep.fits.front().fit->envelope_slope;
    }
    j["theoretical"] = to_string(rep.theoretical);
    j["theoretical_value"] = rep.theoretical.get_d();
    j["tolerance"] = rep.tolerance;
    j["tainted"] = rep.tainted;
    j["verdict"] = rep.verdict ? json(*rep.verdict) : json(nullptr);
    j["total_runtime"] = rep.total_runtime;
    return j;
}

inline std::string report_to_csv(const SweepReport& rep)
{
    auto os = detail::classic_stream();
    os << "epsilon,count,main_term,remainder,abs_remainder,guard_hits,wall_time";
    switch (rep.kind) {
    case ReportKind::sweep:
        os << "\n";
        for (const auto& c : rep.counts)
            os << to_string(c.epsilon) << ',' << c.count << ',' << c.main_term << ',' << c.remainder << ','
               << std::fabs(c.remainder) << ',' << c.guard_band_hits << ',' << c.wall_time << "\n";
        break;
    case ReportKind::average:
        os << ",mean_abs_r,std_error,n_samples\n";
        for (const auto& a : rep.averages)
            os << to_string(a.epsilon) << ',' << a.mean_count << ',' << a.main_term << ',' << a.mean_remainder << ','
               << a.mean_abs_remainder << ',' << a.guard_band_hits << ',' << a.wall_time << ','
               << a.mean_abs_remainder << ',' << a.std_error << ',' << a.samples << "\n";
        break;
    case ReportKind::spectral:
        os << ",lambda,N_eps,prediction,deviation,crosscheck\n";
        for (const auto& s : rep.spectra)
            os << to_string(s.epsilon) << ',' << s.counting_value << ',' << s.prediction << ',' << s.deviation << ','
               << std::fabs(s.deviation) << ',' << s.guard_band_hits << ',' << s.wall_time << ',' << s.lambda << ','
               << s.counting_value << ',' << s.prediction << ',' << s.deviation << ','
               << (s.crosscheck ? "true" : "false") << "\n";
        break;
    }
    return os.str();
}

/// Two-column (log10 eps, log10 value) blocks, one per series, separated by blank lines.
inline std::string report_to_plotdata(const SweepReport& rep)
{
    auto os = detail::classic_stream();
    auto block = [&](const std::string& name, const std::vector<std::pair<double, double>>& xy) {
        os << "# " << name << "\n";
        double running = 0.0;
        std::vector<std::pair<double, double>> env;
        for (auto [e, v] : xy) {
            double a = std::fabs(v);
            if (a > 0)
                os << std::log10(e) << ' ' << std::log10(a) << "\n";
            running = std::max(running, a);
            if (running > 0)
                env.emplace_back(e, running);
        }
        os << "\n# " << name << " envelope\n";
        for (auto [e, v] : env)
            os << std::log10(e) << ' ' << std::log10(v) << "\n";
        os << "\n";
    };
    switch (rep.kind) {
    case ReportKind::sweep: {
        std::vector<std::pair<double, double>> xy;
        for (const auto& c : rep.counts)
            xy.emplace_back(c.epsilon.get_d(), c.remainder);
        block("abs_remainder", xy);
        break;
    }
    case ReportKind::average: {
        std::vector<std::pair<double, double>> xy;
        for (const auto& a : rep.averages)
            xy.emplace_back(a.epsilon.get_d(), a.mean_abs_remainder);
        block("mean_abs_r", xy);
        break;
    }
    case ReportKind::spectral: {
        std::string current;
        std::vector<std::pair<double, double>> dev, norm;
        auto flush = [&] {
            if (dev.empty())
                return;
            block("abs_deviation level=" + current, dev);
            block("normalized_deviation level=" + current, norm);
            dev.clear();
            norm.clear();
        };
        for (const auto& s : rep.spectra) {
            if (s.level.str() != current) {
                flush();
                current = s.level.str();
            }
            dev.emplace_back(s.epsilon.get_d(), s.deviation);
            norm.emplace_back(s.epsilon.get_d(), s.normalized_deviation);
        }
        flush();
        break;
    }
    }
    return os.str();
}

inline std::string render_report(const SweepReport& rep, const std::string& format)
{
    if (format == "json")
        return report_to_json(rep).dump(2) + "\n";
    if (format == "csv")
        return report_to_csv(rep);
    if (format == "plotdata")
        return report_to_plotdata(rep);
    throw std::invalid_argument("unknown report format '" + format + "'");
}

inline std::string report_extension(const std::string& format)
{
    if (format == "plotdata")
        return ".dat";
    return "." + format;
}

/// Writes <dir>/<kind>.<ext>; returns the path written.
inline std::filesystem::path emit_report(const SweepReport& rep, const std::string& format,
                                         const std::filesystem::path& dir)
{
    std::string text = render_report(rep, format);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::filesystem::path path = dir / (to_string(rep.kind) + report_extension(format));
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw report_io_error("cannot write report to '" + path.string() + "'");
    f << text;
    if (!f)
        throw report_io_error("failed writing '" + path.string() + "'");
    return path;
}

} // namespace aniso

#endif
