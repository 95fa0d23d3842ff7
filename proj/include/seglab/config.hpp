#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seglab/errors.hpp"
#include "seglab/geometry.hpp"
#include "seglab/pucci.hpp"
#include "seglab/solver.hpp"

namespace seglab {

enum class Diagnostic : std::uint8_t { Overlap, Mass, Subharmonic, Limit, Holder, Growth, Lipschitz, Acf };

inline const std::map<std::string, Diagnostic>& diagnostic_names() {
    static const std::map<std::string, Diagnostic> names{
        {"overlap", Diagnostic::Overlap}, {"mass", Diagnostic::Mass},           {"subharmonic", Diagnostic::Subharmonic},
        {"limit", Diagnostic::Limit},     {"holder", Diagnostic::Holder},       {"growth", Diagnostic::Growth},
        {"lipschitz", Diagnostic::Lipschitz}, {"acf", Diagnostic::Acf}};
    return names;
}

struct DiagnosticsConfig {
    std::set<Diagnostic> enabled;
    double delta = 0.0;             ///< support threshold; 0 selects the default rule
    double limit_delta = 0.05;      ///< threshold of the limit-equation residual
    int holder_kmax = 6;
    std::vector<double> growth_radii_h{4, 8, 16, 32}; ///< in units of h
    int growth_points = 20;
    double lipschitz_radius = 0.125;
    std::vector<double> acf_radii_h{8, 12, 18, 27}; ///< in units of h
    double overlap_slack = 0.05;
    double acf_slack = 0.10;
    double subharmonic_tol = 1e-4;
    double growth_spread = 3.0;

    bool on(Diagnostic d) const { return enabled.count(d) != 0; }
};

/// Everything a batch run needs. Built from a flat `section.key = value` file.
struct RunConfig {
    double radius = 1.0;
    double h = 1.0 / 64.0;
    Point center{};
    std::vector<BoundarySegment> segments;
    double holder_exponent = 1.0;
    Ellipticity ell{1.0, 2.0};
    std::vector<double> schedule{1.0};
    SolveConfig solver{};
    DiagnosticsConfig diagnostics{};
    std::string output_dir = "seglab_out";
    std::uint64_t seed = 1;

    int populations() const {
        int d = 0;
        for (const auto& s : segments) d = std::max(d, s.population + 1);
        return d;
    }
};

/// d equal arcs covering the circle, the first centred at angle 0.
inline std::vector<BoundarySegment> even_arcs(int d, double amplitude) {
    if (d < 1) throw InvalidArgument("population count must be >= 1");
    std::vector<BoundarySegment> segs;
    const double w = 2.0 * std::numbers::pi / d;
    for (int i = 0; i < d; ++i) segs.push_back({i * w - 0.5 * w, i * w + 0.5 * w, amplitude, i});
    return segs;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream is(s);
    while (std::getline(is, tok, sep)) out.push_back(trim(tok));
    return out;
}

/// Number with an optional `pi` factor: `1.5`, `pi`, `0.5pi`, `-pi`.
inline double parse_real(const std::string& raw, int line) {
    std::string s = trim(raw);
    double factor = 1.0;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        factor = std::numbers::pi;
        s = trim(s.substr(0, s.size() - 2));
        if (s.empty() || s == "+") s = "1";
        if (s == "-") s = "-1";
        if (s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v * factor;
    } catch (const std::logic_error&) {
        throw ConfigError("expected a number, got '" + raw + "'", line);
    }
}

inline int parse_int(const std::string& raw, int line) {
    const double v = parse_real(raw, line);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("expected an integer, got '" + raw + "'", line);
    return static_cast<int>(v);
}

inline std::vector<double> parse_list(const std::string& raw, int line) {
    std::vector<double> out;
    for (const auto& t : split(raw, ',')) out.push_back(parse_real(t, line));
    if (out.empty()) throw ConfigError("empty list", line);
    return out;
}

} // namespace detail

/// Parses the flat key/value format. `#` starts a comment; lists are comma separated;
/// boundary segments are `population:theta0:theta1:amplitude` items.
inline RunConfig parse_run_config(std::istream& is) {
    using namespace detail;
    RunConfig cfg;
    std::map<std::string, int> seen;
    std::string line;
    int lineno = 0;
    std::string layout = "even";
    int d = 2;
    double amplitude = 1.0;
    bool explicit_segments = false;
    int segments_line = 0;
    double lambda = 1.0, Lambda = 2.0;
    int ell_line = 0;

    const std::map<std::string, std::function<void(const std::string&, int)>> handlers{
        {"domain.radius", [&](const std::string& v, int l) { cfg.radius = parse_real(v, l); }},
        {"domain.h", [&](const std::string& v, int l) { cfg.h = parse_real(v, l); }},
        {"domain.center",
         [&](const std::string& v, int l) {
             auto xs = parse_list(v, l);
             if (xs.size() != 2) throw ConfigError("domain.center needs two coordinates", l);
             cfg.center = {xs[0], xs[1]};
         }},
        {"populations.d", [&](const std::string& v, int l) { d = parse_int(v, l); }},
        {"populations.layout",
         [&](const std::string& v, int l) {
             if (v != "even" && v != "antipodal") throw ConfigError("populations.layout must be even or antipodal", l);
             layout = v;
         }},
        {"populations.amplitude", [&](const std::string& v, int l) { amplitude = parse_real(v, l); }},
        {"populations.holder_exponent", [&](const std::string& v, int l) { cfg.holder_exponent = parse_real(v, l); }},
        {"populations.segments",
         [&](const std::string& v, int l) {
             explicit_segments = true;
             segments_line = l;
             for (const auto& item : split(v, ',')) {
                 auto f = split(item, ':');
                 if (f.size() != 4) throw ConfigError("segment '" + item + "' is not population:theta0:theta1:amplitude", l);
                 cfg.segments.push_back({parse_real(f[1], l), parse_real(f[2], l), parse_real(f[3], l), parse_int(f[0], l)});
             }
         }},
        {"ellipticity.lambda", [&](const std::string& v, int l) { lambda = parse_real(v, l), ell_line = l; }},
        {"ellipticity.Lambda", [&](const std::string& v, int l) { Lambda = parse_real(v, l), ell_line = l; }},
        {"epsilon.schedule", [&](const std::string& v, int l) { cfg.schedule = parse_list(v, l); }},
        {"solver.inner_tol", [&](const std::string& v, int l) { cfg.solver.inner_tol = parse_real(v, l); }},
        {"solver.outer_tol", [&](const std::string& v, int l) { cfg.solver.outer_tol = parse_real(v, l); }},
        {"solver.max_inner", [&](const std::string& v, int l) { cfg.solver.max_inner = parse_int(v, l); }},
        {"solver.max_outer", [&](const std::string& v, int l) { cfg.solver.max_outer = parse_int(v, l); }},
        {"solver.max_newton", [&](const std::string& v, int l) { cfg.solver.max_newton = parse_int(v, l); }},
        {"solver.cfl_safety", [&](const std::string& v, int l) { cfg.solver.cfl_safety = parse_real(v, l); }},
        {"solver.damping", [&](const std::string& v, int l) { cfg.solver.damping = parse_real(v, l); }},
        {"solver.method",
         [&](const std::string& v, int l) {
             if (v == "newton") cfg.solver.method = InnerMethod::Newton;
             else if (v == "relaxation") cfg.solver.method = InnerMethod::Relaxation;
             else throw ConfigError("solver.method must be newton or relaxation", l);
         }},
        {"solver.sweep",
         [&](const std::string& v, int l) {
             if (v == "gauss-seidel") cfg.solver.sweep = OuterSweep::GaussSeidel;
             else if (v == "jacobi") cfg.solver.sweep = OuterSweep::Jacobi;
             else throw ConfigError("solver.sweep must be gauss-seidel or jacobi", l);
         }},
        {"diagnostics.enabled",
         [&](const std::string& v, int l) {
             cfg.diagnostics.enabled.clear();
             for (const auto& name : split(v, ',')) {
                 if (name.empty() || name == "none") continue;
                 if (name == "all") {
                     for (const auto& [n, dg] : diagnostic_names()) cfg.diagnostics.enabled.insert(dg);
                     continue;
                 }
                 auto it = diagnostic_names().find(name);
                 if (it == diagnostic_names().end()) throw ConfigError("unknown diagnostic '" + name + "'", l);
                 cfg.diagnostics.enabled.insert(it->second);
             }
         }},
        {"diagnostics.delta", [&](const std::string& v, int l) { cfg.diagnostics.delta = parse_real(v, l); }},
        {"diagnostics.limit_delta", [&](const std::string& v, int l) { cfg.diagnostics.limit_delta = parse_real(v, l); }},
        {"diagnostics.holder_kmax", [&](const std::string& v, int l) { cfg.diagnostics.holder_kmax = parse_int(v, l); }},
        {"diagnostics.growth_radii", [&](const std::string& v, int l) { cfg.diagnostics.growth_radii_h = parse_list(v, l); }},
        {"diagnostics.growth_points", [&](const std::string& v, int l) { cfg.diagnostics.growth_points = parse_int(v, l); }},
        {"diagnostics.lipschitz_radius", [&](const std::string& v, int l) { cfg.diagnostics.lipschitz_radius = parse_real(v, l); }},
        {"diagnostics.acf_radii", [&](const std::string& v, int l) { cfg.diagnostics.acf_radii_h = parse_list(v, l); }},
        {"output.dir", [&](const std::string& v, int) { cfg.output_dir = v; }},
        {"seed", [&](const std::string& v, int l) { cfg.seed = static_cast<std::uint64_t>(parse_int(v, l)); }},
    };

    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = handlers.find(key);
        if (it == handlers.end()) throw ConfigError("unknown key '" + key + "'", lineno);
        if (seen.count(key)) throw ConfigError("duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")", lineno);
        seen[key] = lineno;
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", lineno);
        it->second(value, lineno);
    }

    try {
        cfg.ell = Ellipticity(lambda, Lambda);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), ell_line);
    }
    if (!explicit_segments) {
        if (layout == "antipodal" && d != 2) throw ConfigError("antipodal layout needs populations.d = 2", seen["populations.d"]);
        try {
            cfg.segments = even_arcs(d, amplitude);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what(), seen["populations.d"]);
        }
    }
    // cross-field checks reuse the library validators; map their failures to config lines
    auto check = [&](const char* key, auto&& fn) {
        try {
            fn();
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what(), seen.count(key) ? seen[key] : 0);
        } catch (const SizingError& e) {
            throw ConfigError(e.what(), seen.count(key) ? seen[key] : 0);
        }
    };
    check("domain.h", [&] {
        auto mask = build_disk_domain(cfg.radius, cfg.h, cfg.center);
        const int line_ref = explicit_segments ? segments_line : 0;
        try {
            build_boundary_data(mask, cfg.segments, cfg.holder_exponent);
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what(), line_ref);
        }
    });
    check("epsilon.schedule", [&] {
        for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
            if (!(cfg.schedule[k] > 0.0)) throw InvalidArgument("epsilon schedule must be positive");
            if (k > 0 && !(cfg.schedule[k] < cfg.schedule[k - 1]))
                throw InvalidArgument("epsilon schedule must be strictly decreasing");
        }
    });
    check("solver.inner_tol", [&] { cfg.solver.validate(); });
    if (!(cfg.diagnostics.delta >= 0.0)) throw ConfigError("diagnostics.delta must be >= 0", seen["diagnostics.delta"]);
    if (!(cfg.diagnostics.limit_delta > 0.0))
        throw ConfigError("diagnostics.limit_delta must be positive", seen["diagnostics.limit_delta"]);
    if (cfg.output_dir.empty()) throw ConfigError("output.dir is empty", seen["output.dir"]);
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_run_config(in);
}

} // namespace seglab
