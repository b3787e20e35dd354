#ifndef ANISO_CONFIG_HPP
#define ANISO_CONFIG_HPP

#include "counting.hpp"
#include "decomposition.hpp"
#include "domain.hpp"
#include "exact.hpp"
#include "rotation.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aniso {

class config_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

struct DomainSpec
{
    std::string shape = "ball";
    ExactVector center;
    std::optional<ExactScalar> radius;
    std::optional<ExactScalar> radius_sq;
    std::optional<ExactMatrix> matrix;
    int exponent = 4;
    std::vector<double> rotation_angles;
    std::optional<ExactMatrix> rotation_matrix;
    std::optional<ExactVector> translation;
};

struct RotationSettings
{
    GroupKind group = GroupKind::so_full;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

struct SpectralSettings
{
    ExactVector potential;
    std::vector<ExactScalar> levels; ///< lambda / (4 pi^2)
};

struct ExperimentConfig
{
    std::string source; ///< the config text as read
    std::size_t n = 0;
    std::vector<ExactVector> f_rows;
    std::optional<long> discriminant;
    DomainSpec domain;
    Rational grid_start = make_rational(1, 8);
    Rational grid_ratio = make_rational(1, 2);
    std::size_t grid_count = 8;
    ExponentRegime regime = ExponentRegime::fully_convex;
    EvalMode mode = EvalMode::exact;
    std::uint64_t seed = 0;
    std::optional<RotationSettings> rotation;
    std::optional<SpectralSettings> spectral;
    std::string out_dir;
    std::string format = "json";

    SubspaceSpec subspace() const;
    Domain build_domain() const;
    std::vector<Rational> epsilon_grid() const;
};

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

inline ExactScalar parse_scalar_value(const std::string& key, const std::string& v)
{
    try {
        return parse_exact(v);
    } catch (const std::exception& e) {
        throw config_error(key + ": " + e.what());
    }
}

inline ExactVector parse_vector_value(const std::string& key, const std::string& v)
{
    ExactVector out;
    for (const auto& tok : split(v, ','))
        out.push_back(parse_scalar_value(key, tok));
    return out;
}

/// Rows separated by ';', entries by ','. An empty value or "none" gives no rows.
inline std::vector<ExactVector> parse_rows_value(const std::string& key, const std::string& v)
{
    std::vector<ExactVector> rows;
    if (v.empty() || v == "none")
        return rows;
    for (const auto& r : split(v, ';'))
        rows.push_back(parse_vector_value(key, r));
    return rows;
}

inline ExactMatrix parse_matrix_value(const std::string& key, const std::string& v)
{
    auto rows = parse_rows_value(key, v);
    if (rows.empty())
        throw config_error(key + ": empty matrix");
    for (const auto& r : rows)
        if (r.size() != rows.front().size())
            throw config_error(key + ": ragged matrix");
    return ExactMatrix::from_rows(rows);
}

inline double parse_double_value(const std::string& key, const std::string& v)
{
    double x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw config_error(key + ": not a number '" + v + "'");
    return x;
}

inline std::uint64_t parse_u64_value(const std::string& key, const std::string& v)
{
    std::uint64_t x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw config_error(key + ": not a non-negative integer '" + v + "'");
    return x;
}

inline Rational parse_rational_value(const std::string& key, const std::string& v)
{
    ExactScalar x = parse_scalar_value(key, v);
    if (!x.is_rational())
        throw config_error(key + ": must be rational");
    return x.rational_part();
}

/// Product of Givens rotations over the planes (i, j), i < j, in lexicographic order.
inline Eigen::MatrixXd givens_product(std::size_t n, const std::vector<double>& angles)
{
    if (angles.size() != n * (n - 1) / 2)
        throw config_error("rotation_angles: expected n(n-1)/2 = " + std::to_string(n * (n - 1) / 2) + " angles");
    auto nn = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(nn, nn);
    std::size_t a = 0;
    for (Eigen::Index i = 0; i < nn; ++i)
        for (Eigen::Index j = i + 1; j < nn; ++j) {
            Eigen::MatrixXd g = Eigen::MatrixXd::Identity(nn, nn);
            double c = std::cos(angles[a]), s = std::sin(angles[a]);
            ++a;
            g(i, i) = c;
            g(j, j) = c;
            g(i, j) = -s;
            g(j, i) = s;
            r = g * r;
        }
    return r;
}

} // namespace detail

/// Parses the experiment config text.
///
///     # comment
///     [space]
///     n = 2
///     f_basis = 1, sqrt(2)        # rows spanning F, ';'-separated; "none" for F = {0}
///     [domain]
///     shape = ellipsoid           # ball | ellipsoid | lpball
///     center = 1/10, 1/5
///     matrix = 1, 0; 0, 1/4
///     [sweep]
///     start = 1/8
///     ratio = 1/2
///     count = 8
inline ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    cfg.source = text;
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string section;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        std::string_view body = detail::trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw config_error("line " + std::to_string(lineno) + ": malformed section header");
            section = std::string(detail::trim(body.substr(1, body.size() - 2)));
            if (section != "space" && section != "domain" && section != "sweep" && section != "rotation" &&
                section != "spectral" && section != "output")
                throw config_error("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
            sections[section];
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw config_error("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw config_error("line " + std::to_string(lineno) + ": key outside of a section");
        std::string key(detail::trim(body.substr(0, eq)));
        std::string value(detail::trim(body.substr(eq + 1)));
        if (sections[section].count(key))
            throw config_error("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        sections[section][key] = value;
    }

    auto take = [&](const std::string& sec, const std::string& key) -> std::optional<std::string> {
        auto s = sections.find(sec);
        if (s == sections.end())
            return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end())
            return std::nullopt;
        std::string v = k->second;
        s->second.erase(k);
        return v;
    };
    auto need = [&](const std::string& sec, const std::string& key) {
        auto v = take(sec, key);
        if (!v)
            throw config_error("missing [" + sec + "] " + key);
        return *v;
    };

    // [space]
    cfg.n = detail::parse_u64_value("n", need("space", "n"));
    if (cfg.n < 1)
        throw config_error("n must be at least 1");
    if (auto v = take("space", "f_basis"))
        cfg.f_rows = detail::parse_rows_value("f_basis", *v);
    for (const auto& r : cfg.f_rows)
        if (r.size() != cfg.n)
            throw config_error("f_basis: every row needs n entries");
    if (auto v = take("space", "discriminant"))
        cfg.discriminant = static_cast<long>(detail::parse_u64_value("discriminant", *v));

    // [domain]
    DomainSpec& d = cfg.domain;
    d.shape = need("domain", "shape");
    if (d.shape != "ball" && d.shape != "ellipsoid" && d.shape != "lpball")
        throw config_error("shape must be ball, ellipsoid or lpball");
    if (auto v = take("domain", "center"))
        d.center = detail::parse_vector_value("center", *v);
    else
        d.center.assign(cfg.n, ExactScalar());
    if (d.center.size() != cfg.n)
        throw config_error("center: needs n entries");
    if (auto v = take("domain", "radius"))
        d.radius = detail::parse_scalar_value("radius", *v);
    if (auto v = take("domain", "radius_sq"))
        d.radius_sq = detail::parse_scalar_value("radius_sq", *v);
    if (auto v = take("domain", "matrix"))
        d.matrix = detail::parse_matrix_value("matrix", *v);
    if (auto v = take("domain", "exponent"))
        d.exponent = static_cast<int>(detail::parse_u64_value("exponent", *v));
    if (auto v = take("domain", "rotation_angles"))
        for (const auto& tok : detail::split(*v, ','))
            d.rotation_angles.push_back(detail::parse_double_value("rotation_angles", tok));
    if (auto v = take("domain", "rotation_matrix"))
        d.rotation_matrix = detail::parse_matrix_value("rotation_matrix", *v);
    if (auto v = take("domain", "translation")) {
        d.translation = detail::parse_vector_value("translation", *v);
        if (d.translation->size() != cfg.n)
            throw config_error("translation: needs n entries");
    }

    // [sweep]
    if (auto v = take("sweep", "start"))
        cfg.grid_start = detail::parse_rational_value("start", *v);
    if (auto v = take("sweep", "ratio"))
        cfg.grid_ratio = detail::parse_rational_value("ratio", *v);
    if (auto v = take("sweep", "count"))
        cfg.grid_count = detail::parse_u64_value("count", *v);
    if (auto v = take("sweep", "regime")) {
        try {
            cfg.regime = parse_regime(*v);
        } catch (const std::exception& e) {
            throw config_error(e.what());
        }
    }
    if (auto v = take("sweep", "mode")) {
        if (*v == "exact")
            cfg.mode = EvalMode::exact;
        else if (*v == "float")
            cfg.mode = EvalMode::floating;
        else
            throw config_error("mode must be exact or float");
    }
    if (auto v = take("sweep", "seed"))
        cfg.seed = detail::parse_u64_value("seed", *v);
    if (cfg.grid_start <= 0)
        throw config_error("start must be positive");
    if (cfg.grid_ratio <= 0 || cfg.grid_ratio >= 1)
        throw config_error("ratio must lie strictly between 0 and 1");

    // [rotation]
    if (sections.count("rotation")) {
        RotationSettings rs;
        try {
            rs.group = parse_group(need("rotation", "group"));
        } catch (const config_error&) {
            throw;
        } catch (const std::exception& e) {
            throw config_error(e.what());
        }
        rs.samples = detail::parse_u64_value("samples", need("rotation", "samples"));
        rs.seed = detail::parse_u64_value("seed", need("rotation", "seed"));
        cfg.rotation = rs;
    }

    // [spectral]
    if (sections.count("spectral")) {
        SpectralSettings ss;
        if (auto v = take("spectral", "potential"))
            ss.potential = detail::parse_vector_value("potential", *v);
        else
            ss.potential.assign(cfg.n, ExactScalar());
        if (ss.potential.size() != cfg.n)
            throw config_error("potential: needs n entries");
        if (auto v = take("spectral", "levels"); v && !v->empty())
            ss.levels = detail::parse_vector_value("levels", *v);
        cfg.spectral = ss;
    }

    // [output]
    if (auto v = take("output", "dir"))
        cfg.out_dir = *v;
    if (auto v = take("output", "format"))
        cfg.format = *v;

    for (const auto& [sec, keys] : sections)
        for (const auto& kv : keys)
            throw config_error("unknown key [" + sec + "] " + kv.first);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw config_error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

inline SubspaceSpec ExperimentConfig::subspace() const
{
    SubspaceSpec spec = SubspaceSpec::from_vectors(n, f_rows);
    if (discriminant && *discriminant != spec.discriminant && spec.discriminant != 0)
        throw config_error("discriminant does not match the surds in f_basis");
    return spec;
}

inline Domain ExperimentConfig::build_domain() const
{
    const DomainSpec& d = domain;
    auto radius_sq = [&]() -> ExactScalar {
        if (d.radius && d.radius_sq)
            throw config_error("give radius or radius_sq, not both");
        if (d.radius)
            return *d.radius * *d.radius;
        if (d.radius_sq)
            return *d.radius_sq;
        throw config_error("missing radius");
    };
    std::optional<Domain> dom;
    try {
        if (d.shape == "ball") {
            dom = Domain::ball(d.center, radius_sq());
        } else if (d.shape == "ellipsoid") {
            if (!d.matrix)
                throw config_error("ellipsoid needs matrix");
            dom = Domain::ellipsoid(d.center, *d.matrix);
        } else {
            if (!d.radius)
                throw config_error("lpball needs radius");
            dom = Domain::lp_ball(d.center, *d.radius, d.exponent);
        }
        if (d.rotation_matrix)
            dom = dom->rotated(*d.rotation_matrix);
        if (!d.rotation_angles.empty())
            dom = dom->rotated(detail::givens_product(n, d.rotation_angles));
        if (d.translation)
            dom = dom->translated(*d.translation);
    } catch (const config_error&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    return *dom;
}

inline std::vector<Rational> ExperimentConfig::epsilon_grid() const
{
    std::vector<Rational> grid;
    Rational e = grid_start;
    for (std::size_t i = 0; i < grid_count; ++i) {
        grid.push_back(e);
        e *= grid_ratio;
    }
    return grid;
}

} // namespace aniso

#endif
