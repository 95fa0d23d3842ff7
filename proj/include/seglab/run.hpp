#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "seglab/analysis.hpp"
#include "seglab/config.hpp"
#include "seglab/errors.hpp"
#include "seglab/geometry.hpp"
#include "seglab/io.hpp"
#include "seglab/solver.hpp"

namespace seglab {

/// Process exit codes of the batch driver.
enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_unconverged = 3, exit_diagnostic = 4 };

inline constexpr const char* output_dir_env = "SEGLAB_OUTPUT_DIR";
inline constexpr const char* summary_header = "file,kind,key,value,verdict";

inline std::string resolve_output_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv(output_dir_env); env && *env) return env;
    return cfg.output_dir;
}

inline std::string field_file_name(std::size_t eps_index, int component) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "field_e%02zu_u%d.csv", eps_index, component);
    return buf;
}

/// One diagnostic report: its CSV block, headline scalar and verdict.
struct DiagnosticOutcome {
    std::string file;
    CsvBlock block;
    std::string key;
    double value = 0.0;
    bool pass = true;
};

/// All inputs a diagnostic needs, computed once per run.
struct SweepContext {
    const RunConfig& cfg;
    const DomainMask& mask;
    const std::vector<SystemState>& states;
    double delta = 0.0;

    const SystemState& final_state() const { return states.back(); }
    double h() const { return mask.grid().h(); }
};

namespace detail {

inline std::string verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

inline DiagnosticOutcome overlap_report(const SweepContext& ctx) {
    DiagnosticOutcome out{"overlap.csv", CsvBlock("support_overlap", {"epsilon", "overlap", "nonincreasing"}), "final_over_initial"};
    const double slack = ctx.cfg.diagnostics.overlap_slack;
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> ov;
    for (const auto& s : ctx.states) {
        const double o = support_overlap(s, ctx.mask, ctx.delta);
        const bool ok = o <= prev * (1.0 + slack);
        out.pass = out.pass && ok;
        out.block.row({format_real(s.epsilon), format_real(o), verdict(ok)});
        ov.push_back(o);
        prev = o;
    }
    out.value = ov.front() > 0.0 ? ov.back() / ov.front() : 0.0;
    out.block.param("delta", ctx.delta).param("slack", slack).param("final_over_initial", out.value);
    return out;
}

inline DiagnosticOutcome mass_report(const SweepContext& ctx) {
    DiagnosticOutcome out{"mass.csv", CsvBlock("interaction_mass", {"epsilon", "mass"}), "final_mass"};
    std::vector<double> m;
    for (const auto& s : ctx.states) {
        m.push_back(interaction_mass(s, ctx.mask));
        out.block.row({format_real(s.epsilon), format_real(m.back())});
    }
    const double earlier = m.size() > 1 ? *std::max_element(m.begin(), m.end() - 1) : m.back();
    out.value = m.back();
    out.pass = m.back() <= 3.0 * earlier;
    out.block.param("bound_factor", 3.0);
    return out;
}

inline DiagnosticOutcome subharmonic_report(const SweepContext& ctx) {
    DiagnosticOutcome out{"subharmonic.csv", CsvBlock("subharmonicity", {"epsilon", "component", "min_laplacian"}),
                          "min_laplacian", std::numeric_limits<double>::infinity()};
    for (const auto& s : ctx.states)
        for (int i = 0; i < s.d(); ++i) {
            const double m = subharmonicity_check(s.fields[i], ctx.mask);
            out.value = std::min(out.value, m);
            out.block.row({format_real(s.epsilon), std::to_string(i), format_real(m)});
        }
    const double tol = ctx.cfg.diagnostics.subharmonic_tol;
    out.pass = out.value >= -tol;
    out.block.param("tolerance", tol);
    return out;
}

inline DiagnosticOutcome limit_report(const SweepContext& ctx) {
    DiagnosticOutcome out{"limit.csv",
                          CsvBlock("limit_residual", {"epsilon", "interior_residual", "coupling_magnitude",
                                                      "supersolution_max", "interior_nodes"}),
                          "supersolution_max"};
    const auto& s = ctx.final_state();
    const auto r = limit_residual(s, ctx.cfg.ell, ctx.mask, ctx.cfg.diagnostics.limit_delta);
    out.block.param("delta", ctx.cfg.diagnostics.limit_delta);
    out.block.row({format_real(s.epsilon), format_real(r.interior_residual), format_real(r.coupling_magnitude),
                   format_real(r.supersolution_max), std::to_string(r.interior_nodes)});
    out.value = r.supersolution_max;
    out.pass = r.interior_residual <= 10.0 * r.coupling_magnitude + ctx.cfg.solver.outer_tol &&
               r.supersolution_max <= 1e-3;
    return out;
}

inline DiagnosticOutcome holder_report(const SweepContext& ctx) {
    DiagnosticOutcome out{"holder.csv",
                          CsvBlock("holder_exponent", {"epsilon", "alpha_hat", "constant", "fit_residual", "k_max_used"}),
                          "alpha_spread"};
    const Grid& g = ctx.mask.grid();
    const Point center = g.position(interface_node(ctx.final_state(), ctx.mask));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : ctx.states) {
        const auto e = holder_exponent_estimate(s.fields[0], ctx.mask, center, ctx.cfg.diagnostics.holder_kmax);
        lo = std::min(lo, e.alpha_hat), hi = std::max(hi, e.alpha_hat);
        out.block.row({format_real(s.epsilon), format_real(e.alpha_hat), format_real(e.constant),
                       format_real(e.fit_residual), std::to_string(e.k_max_used)});
    }
    out.value = hi - lo;
    out.pass = out.value < 0.15;
    out.block.param("center_x", center.x).param("center_y", center.y).param("spread", out.value);
    return out;
}

/// Up to `count` free-boundary nodes of u_0 in the final state, evenly strided.
inline std::vector<Node> growth_sample(const SweepContext& ctx) {
    const auto all = free_boundary_points(ctx.final_state().fields[0], ctx.mask, ctx.delta);
    if (all.empty()) throw HypothesisError("no free-boundary node at the support threshold");
    const std::size_t count = static_cast<std::size_t>(std::max(1, ctx.cfg.diagnostics.growth_points));
    const std::size_t stride = (all.size() + count - 1) / count;
    std::vector<Node> out;
    for (std::size_t k = 0; k < all.size(); k += stride) out.push_back(all[k]);
    return out;
}

inline DiagnosticOutcome growth_report(const SweepContext& ctx) {
    DiagnosticOutcome out{"growth.csv", CsvBlock("linear_growth", {"i", "j", "R", "sup", "ratio", "spread"}),
                          "max_ratio_spread"};
    std::vector<double> radii;
    for (double r : ctx.cfg.diagnostics.growth_radii_h) radii.push_back(r * ctx.h());
    int skipped = 0;
    for (Node n : growth_sample(ctx)) {
        const auto p = linear_growth_profile(ctx.final_state().fields[0], ctx.mask, n, radii);
        skipped += static_cast<int>(p.skipped.size());
        const double spread = p.ratio_spread();
        out.value = std::max(out.value, spread);
        for (const auto& r : p.rows)
            out.block.row({std::to_string(n.i), std::to_string(n.j), format_real(r.R), format_real(r.sup),
                           format_real(r.ratio), format_real(spread)});
    }
    out.pass = out.value <= ctx.cfg.diagnostics.growth_spread;
    out.block.param("delta", ctx.delta).param("skipped_radii", std::to_string(skipped));
    return out;
}

inline DiagnosticOutcome lipschitz_report(const SweepContext& ctx) {
    DiagnosticOutcome out{"lipschitz.csv", CsvBlock("lipschitz", {"i", "j", "epsilon", "lipschitz"}),
                          "max_growth_factor"};
    const Grid& g = ctx.mask.grid();
    const double radius = ctx.cfg.diagnostics.lipschitz_radius;
    for (Node n : growth_sample(ctx)) {
        double first = 0.0, worst = 0.0;
        for (std::size_t k = 0; k < ctx.states.size(); ++k) {
            const double L = lipschitz_norm_estimate(ctx.states[k].fields[0], ctx.mask, g.position(n), radius);
            if (k == 0) first = L;
            worst = std::max(worst, L);
            out.block.row({std::to_string(n.i), std::to_string(n.j), format_real(ctx.states[k].epsilon), format_real(L)});
        }
        out.value = std::max(out.value, first > 0.0 ? worst / first : 1.0);
    }
    out.pass = out.value <= 2.0;
    out.block.param("radius", radius);
    return out;
}

inline DiagnosticOutcome acf_report(const SweepContext& ctx) {
    DiagnosticOutcome out{"acf.csv", CsvBlock("acf", {"rho", "J", "factor_u", "factor_v"}), "monotone"};
    const auto& s = ctx.final_state();
    if (s.d() < 2) throw HypothesisError("monotonicity functional needs two populations");
    const double sep = separation_threshold(s, ctx.mask);
    const Grid& g = ctx.mask.grid();
    const Point center = g.position(interface_node(s, ctx.mask));
    const auto u = positive_part(s.fields[0], ctx.mask, sep);
    const auto v = positive_part(s.fields[1], ctx.mask, sep);
    std::vector<double> radii;
    for (double r : ctx.cfg.diagnostics.acf_radii_h) radii.push_back(r * ctx.h());
    const auto curve = acf_functional(u, v, ctx.mask, center, radii);
    for (std::size_t k = 0; k < curve.J.size(); ++k)
        out.block.row({format_real(curve.radii[k]), format_real(curve.J[k]), format_real(curve.factor_u[k]),
                       format_real(curve.factor_v[k])});
    const double drop = curve.worst_relative_drop();
    const double jmax = *std::max_element(curve.J.begin(), curve.J.end());
    out.pass = drop <= ctx.cfg.diagnostics.acf_slack && jmax <= curve.bound;
    out.value = out.pass ? 1.0 : 0.0;
    out.block.param("center_x", center.x).param("center_y", center.y).param("threshold", sep);
    out.block.param("worst_drop", drop).param("bound", curve.bound);
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write '" + path.string() + "'");
    os << text;
    if (!os) throw Error("write failed for '" + path.string() + "'");
}

} // namespace detail

/// Runs every enabled diagnostic on a finished sweep. A diagnostic that cannot be evaluated
/// (its hypotheses fail) yields a failing outcome carrying the error text.
inline std::vector<DiagnosticOutcome> run_diagnostics(const SweepContext& ctx) {
    using Fn = DiagnosticOutcome (*)(const SweepContext&);
    const std::pair<Diagnostic, Fn> table[] = {
        {Diagnostic::Overlap, detail::overlap_report},     {Diagnostic::Mass, detail::mass_report},
        {Diagnostic::Subharmonic, detail::subharmonic_report}, {Diagnostic::Limit, detail::limit_report},
        {Diagnostic::Holder, detail::holder_report},       {Diagnostic::Growth, detail::growth_report},
        {Diagnostic::Lipschitz, detail::lipschitz_report}, {Diagnostic::Acf, detail::acf_report}};
    std::vector<DiagnosticOutcome> out;
    for (const auto& [which, fn] : table) {
        if (!ctx.cfg.diagnostics.on(which)) continue;
        try {
            out.push_back(fn(ctx));
        } catch (const Error& e) {
            std::string name;
            for (const auto& [n, d] : diagnostic_names())
                if (d == which) name = n;
            DiagnosticOutcome failed{name + ".csv", CsvBlock(name, {"error"}), "error", 0.0, false};
            failed.block.row({e.what()});
            out.push_back(std::move(failed));
        }
    }
    return out;
}

/// Batch driver: solve the sweep, persist fields, log and diagnostics, and return the exit code.
/// `log` receives one human-readable line per stage.
inline int run(const RunConfig& cfg, std::ostream& log) {
    namespace fs = std::filesystem;
    const DomainMask mask = build_disk_domain(cfg.radius, cfg.h, cfg.center);
    const auto phi = build_boundary_data(mask, cfg.segments, cfg.holder_exponent);

    const fs::path dir = resolve_output_dir(cfg);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        log << "error: output directory '" << dir.string() << "' is not writable\n";
        return exit_config;
    }

    const auto states = epsilon_continuation(phi, cfg.schedule, cfg.ell, mask, cfg.solver);
    CsvBlock summary("summary", {"file", "kind", "key", "value", "verdict"});
    bool converged = true;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto& s = states[k];
        converged = converged && s.converged;
        const double res = *std::max_element(s.residual.begin(), s.residual.end());
        log << "epsilon " << format_real(s.epsilon) << ": outer " << s.outer_iters << ", residual " << format_real(res)
            << (s.converged ? "" : " (not converged)") << '\n';
        for (int i = 0; i < s.d(); ++i) {
            std::ostringstream os;
            write_field_dump(os, s.fields[i], mask);
            const std::string name = field_file_name(k, i);
            detail::write_text(dir / name, os.str());
            summary.row({name, "field", "residual", format_real(s.residual[i]), detail::verdict(s.converged)});
        }
    }
    {
        std::ostringstream os;
        write_convergence_log(os, states);
        detail::write_text(dir / "convergence.csv", os.str());
        double worst = 0.0;
        for (const auto& s : states) worst = std::max(worst, *std::max_element(s.residual.begin(), s.residual.end()));
        summary.row({"convergence.csv", "log", "max_final_residual", format_real(worst), detail::verdict(converged)});
    }

    bool diagnostics_ok = true;
    if (converged) {
        double sup_phi = 0.0;
        for (const auto& p : phi) sup_phi = std::max(sup_phi, p.max());
        const double delta = cfg.diagnostics.delta > 0.0 ? cfg.diagnostics.delta
                                                         : default_support_threshold(cfg.solver.outer_tol, sup_phi);
        const SweepContext ctx{cfg, mask, states, delta};
        for (const auto& d : run_diagnostics(ctx)) {
            detail::write_text(dir / d.file, d.block.str());
            summary.row({d.file, "diagnostic", d.key, format_real(d.value), detail::verdict(d.pass)});
            log << d.file << ": " << d.key << " = " << format_real(d.value) << ' ' << detail::verdict(d.pass) << '\n';
            diagnostics_ok = diagnostics_ok && d.pass;
        }
    } else if (!cfg.diagnostics.enabled.empty()) {
        log << "diagnostics skipped: solver did not converge\n";
    }
    summary.param("seed", std::to_string(cfg.seed));
    summary.param("status", converged ? (diagnostics_ok ? "ok" : "diagnostic_failure") : "not_converged");
    detail::write_text(dir / "summary.csv", summary.str());

    if (!converged) return exit_unconverged;
    return diagnostics_ok ? exit_ok : exit_diagnostic;
}

/// Loads a config file and runs it; configuration problems map to exit_config.
inline int run_file(const std::string& path, std::ostream& log) {
    RunConfig cfg;
    try {
        cfg = load_run_config(path);
    } catch (const ConfigError& e) {
        log << "config error: " << path << ": " << e.what() << '\n';
        return exit_config;
    }
    return run(cfg, log);
}

} // namespace seglab
