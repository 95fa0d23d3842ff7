#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "seglab/errors.hpp"
#include "seglab/geometry.hpp"
#include "seglab/pucci.hpp"

namespace seglab {

enum class InnerMethod : std::uint8_t {
    Relaxation, ///< explicit pseudo-time stepping only
    Newton,     ///< frozen-coefficient Newton steps, relaxation as fallback
};

enum class OuterSweep : std::uint8_t {
    GaussSeidel, ///< component i sees components < i already updated in this pass
    Jacobi,      ///< every component solved against the previous pass
};

struct SolveConfig {
    double inner_tol = 1e-7;
    double outer_tol = 1e-6;
    int max_inner = 200000;
    int max_outer = 500;
    double cfl_safety = 0.9;
    double damping = 1.0;
    InnerMethod method = InnerMethod::Newton;
    OuterSweep sweep = OuterSweep::GaussSeidel;
    int max_newton = 60;

    void validate() const {
        if (!(inner_tol > 0.0) || !(outer_tol > 0.0)) throw InvalidArgument("tolerances must be positive");
        if (max_inner < 1 || max_outer < 1 || max_newton < 0) throw InvalidArgument("iteration caps must be >= 1");
        if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw InvalidArgument("cfl_safety must lie in (0, 1]");
        if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
    }
};

/// One line of the convergence log.
struct ConvergenceRecord {
    double epsilon = 0.0;
    int outer_iter = 0;
    int component = 0;
    double residual = 0.0;
    int inner_iters = 0;
};

/// The d densities at one competition parameter, plus convergence metadata.
struct SystemState {
    double epsilon = 1.0;
    std::vector<ScalarField> fields;
    std::vector<double> residual;
    int outer_iters = 0;
    int inner_iters = 0;
    bool converged = false;
    std::vector<ConvergenceRecord> log;

    int d() const noexcept { return static_cast<int>(fields.size()); }
};

/// Result of one scalar solve.
struct ComponentSolve {
    ScalarField field;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

/// Absorption coefficient (1/epsilon) * sum of the other densities at every node.
inline std::vector<double> absorption(const SystemState& state, int i) {
    const std::size_t n = state.fields.at(i).size();
    std::vector<double> c(n, 0.0);
    const double k = 1.0 / state.epsilon;
    for (int j = 0; j < state.d(); ++j) {
        if (j == i) continue;
        const auto v = state.fields[j].values();
        for (std::size_t q = 0; q < n; ++q) c[q] += v[q];
    }
    for (double& x : c) x *= k;
    return c;
}

/// Invariant range [min(0, inf data), max(0, sup data)] of the boundary values of `field`.
inline std::pair<double, double> data_bounds(const ScalarField& field, const DomainMask& mask) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t k : mask.boundary_nodes()) {
        lo = std::min(lo, field[k]);
        hi = std::max(hi, field[k]);
    }
    return {lo, hi};
}

/// F(v) = M^-(D^2 v) - c v at every stencil-complete interior node (0 elsewhere); returns max |F|.
inline double operator_residual(const ScalarField& v, std::span<const double> c, const DomainMask& mask,
                                const Ellipticity& ell, std::vector<double>* out = nullptr) {
    const Grid& g = mask.grid();
    if (out) out->assign(g.size(), 0.0);
    double worst = 0.0;
    for (std::size_t k : mask.stencil_nodes()) {
        const Node n = g.node(k);
        const double f = pucci_minus(hessian_at(v, n.i, n.j), ell) - c[k] * v[k];
        if (out) (*out)[k] = f;
        worst = std::max(worst, std::abs(f));
    }
    return worst;
}

inline void clamp_interior(ScalarField& v, const DomainMask& mask, double lo, double hi) {
    for (std::size_t k : mask.interior_nodes()) v[k] = std::clamp(v[k], lo, hi);
}

/// Explicit steps v <- v + tau (M^-(D^2 v) - c v) until max |F| <= tol or `max_steps`.
/// Returns (residual, steps). With `clamp` unset the iterate is left free.
inline std::pair<double, int> relax(ScalarField& v, std::span<const double> c, const DomainMask& mask,
                                    const Ellipticity& ell, double cfl_safety, double tol, int max_steps,
                                    bool clamp, double lo, double hi) {
    const double h = mask.grid().h();
    double cmax = 0.0;
    for (std::size_t k : mask.interior_nodes()) cmax = std::max(cmax, c[k]);
    const double tau = cfl_safety / (4.0 * ell.Lambda / (h * h) + cmax);
    std::vector<double> f;
    double res = operator_residual(v, c, mask, ell, &f);
    int steps = 0;
    while (res > tol && steps < max_steps) {
        for (std::size_t k : mask.interior_nodes()) v[k] += tau * f[k];
        if (clamp) clamp_interior(v, mask, lo, hi);
        ++steps;
        res = operator_residual(v, c, mask, ell, &f);
    }
    return {res, steps};
}

/// Newton iteration on F(v) = 0. Each step freezes the minimizing coefficients of the
/// current Hessians, which turns F into the linear operator trace(A D^2 v) - c v; since
/// the operator is positively homogeneous this is exactly the Newton update.
class NewtonSolver {
public:
    explicit NewtonSolver(const DomainMask& mask) : mask_(mask) {
        unknown_.assign(mask.grid().size(), -1);
        int id = 0;
        for (std::size_t k : mask.stencil_nodes()) unknown_[k] = id++, nodes_.push_back(k);
        n_ = id;
    }

    /// Returns (residual, newton steps). `v` is updated in place.
    std::pair<double, int> solve(ScalarField& v, std::span<const double> c, const Ellipticity& ell, double tol,
                                 int max_steps, double lo, double hi) {
        std::vector<double> f;
        double res = operator_residual(v, c, mask_, ell, &f);
        int steps = 0;
        int stalls = 0;
        while (res > tol && steps < max_steps && stalls < 3) {
            ScalarField full = v;
            if (!linear_step(full, c, ell)) break;
            clamp_interior(full, mask_, lo, hi);
            ++steps;
            ScalarField best = full;
            double best_res = operator_residual(full, c, mask_, ell);
            // backtrack along the Newton direction when the full step does not help
            for (double theta = 0.5; best_res >= res && theta >= 1.0 / 64.0; theta *= 0.5) {
                ScalarField mixed = v;
                for (std::size_t k : nodes_) mixed[k] = v[k] + theta * (full[k] - v[k]);
                const double r = operator_residual(mixed, c, mask_, ell);
                if (r < best_res) best = std::move(mixed), best_res = r;
            }
            if (!(best_res < res)) break;
            stalls = best_res > 0.5 * res ? stalls + 1 : 0;
            v = std::move(best);
            res = best_res;
        }
        return {res, steps};
    }

private:
    bool linear_step(ScalarField& v, std::span<const double> c, const Ellipticity& ell) {
        const Grid& g = mask_.grid();
        const double inv_h2 = 1.0 / (g.h() * g.h());
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n_) * 9);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_);
        for (int row = 0; row < n_; ++row) {
            const std::size_t k = nodes_[row];
            const Node nd = g.node(k);
            const Hessian2 A = minimizing_coefficients(hessian_at(v, nd.i, nd.j), ell);
            const double wx = A.xx * inv_h2, wy = A.yy * inv_h2, wxy = 0.5 * A.xy * inv_h2;
            auto add = [&](int di, int dj, double w) {
                if (w == 0.0) return;
                const std::size_t q = g.index(nd.i + di, nd.j + dj);
                if (unknown_[q] >= 0)
                    trip.emplace_back(row, unknown_[q], w);
                else
                    rhs[row] -= w * v[q];
            };
            trip.emplace_back(row, row, -2.0 * wx - 2.0 * wy - c[k]);
            add(1, 0, wx);
            add(-1, 0, wx);
            add(0, 1, wy);
            add(0, -1, wy);
            add(1, 1, wxy);
            add(-1, -1, wxy);
            add(1, -1, -wxy);
            add(-1, 1, -wxy);
        }
        Eigen::SparseMatrix<double> L(n_, n_);
        L.setFromTriplets(trip.begin(), trip.end());
        L.makeCompressed();
        if (!analyzed_) {
            lu_.analyzePattern(L);
            analyzed_ = true;
        }
        lu_.factorize(L);
        if (lu_.info() != Eigen::Success) return false;
        Eigen::VectorXd x = lu_.solve(rhs);
        if (lu_.info() != Eigen::Success || !x.allFinite()) return false;
        for (int row = 0; row < n_; ++row) v[nodes_[row]] = x[row];
        return true;
    }

    const DomainMask& mask_;
    std::vector<int> unknown_;
    std::vector<std::size_t> nodes_;
    int n_ = 0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    bool analyzed_ = false;
};

inline void check_state(const SystemState& state, const DomainMask& mask) {
    if (state.fields.empty()) throw InvalidArgument("state has no populations");
    if (!(state.epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    for (const auto& f : state.fields)
        if (!(f.grid() == mask.grid())) throw InvalidArgument("field grid differs from mask grid");
}

} // namespace detail

/// Solves M^-(v) = (1/eps) v sum_{j != i} u_j for component i with the other densities frozen.
/// Boundary values are taken from `state.fields[i]`; its interior values are the initial guess.
inline ComponentSolve solve_component(int i, const SystemState& state, const Ellipticity& ell,
                                      const DomainMask& mask, const SolveConfig& cfg) {
    cfg.validate();
    detail::check_state(state, mask);
    if (i < 0 || i >= state.d()) throw InvalidArgument("component index out of range");

    const auto c = detail::absorption(state, i);
    const auto [lo, hi] = detail::data_bounds(state.fields[i], mask);
    ComponentSolve out{state.fields[i]};
    detail::clamp_interior(out.field, mask, lo, hi);

    double res = std::numeric_limits<double>::infinity();
    if (cfg.method == InnerMethod::Newton && cfg.max_newton > 0) {
        detail::NewtonSolver newton(mask);
        auto [r, steps] = newton.solve(out.field, c, ell, cfg.inner_tol, cfg.max_newton, lo, hi);
        res = r;
        out.iterations += steps;
    }
    if (!(res <= cfg.inner_tol)) {
        auto [r, steps] = detail::relax(out.field, c, mask, ell, cfg.cfl_safety, cfg.inner_tol,
                                        cfg.max_inner, true, lo, hi);
        res = r;
        out.iterations += steps;
    }
    out.residual = res;
    out.converged = res <= cfg.inner_tol;
    return out;
}

/// Per-component max over stencil-complete interior nodes of |M^-(u_i) - (1/eps) u_i sum_{j!=i} u_j|.
inline std::vector<double> residual(const SystemState& state, const Ellipticity& ell, const DomainMask& mask) {
    detail::check_state(state, mask);
    std::vector<double> r(state.d());
    for (int i = 0; i < state.d(); ++i)
        r[i] = detail::operator_residual(state.fields[i], detail::absorption(state, i), mask, ell);
    return r;
}

/// Runs `steps` explicit relaxation steps on component i without clamping and returns the
/// largest change of any node. Small values mean the invariant range is dynamically stable.
inline double unclamped_drift(const SystemState& state, int i, const Ellipticity& ell, const DomainMask& mask,
                              const SolveConfig& cfg, int steps = 100) {
    detail::check_state(state, mask);
    const auto c = detail::absorption(state, i);
    ScalarField v = state.fields.at(i);
    detail::relax(v, c, mask, ell, cfg.cfl_safety, 0.0, steps, false, 0.0, 0.0);
    return max_abs_difference(v, state.fields[i]);
}

namespace detail {

inline void check_phi(std::span<const ScalarField> phi, const DomainMask& mask) {
    if (phi.empty()) throw InvalidArgument("no boundary data");
    for (const auto& p : phi) {
        if (!(p.grid() == mask.grid())) throw InvalidArgument("boundary data grid differs from mask grid");
        for (std::size_t k : mask.boundary_nodes())
            if (!(p[k] >= 0.0)) throw InvalidArgument("boundary data must be non-negative");
    }
    for (std::size_t a = 0; a < phi.size(); ++a)
        for (std::size_t b = a + 1; b < phi.size(); ++b)
            for (std::size_t k : mask.boundary_nodes())
                if (phi[a][k] * phi[b][k] != 0.0)
                    throw InvalidArgument("boundary supports of populations " + std::to_string(a) + " and " +
                                          std::to_string(b) + " intersect");
}

/// Fields equal to phi on the boundary and to the uncoupled solution M^-(v) = 0 inside.
inline std::vector<ScalarField> uncoupled_extension(std::span<const ScalarField> phi, const Ellipticity& ell,
                                                    const DomainMask& mask, const SolveConfig& cfg, int& iters) {
    std::vector<ScalarField> out;
    for (const auto& p : phi) {
        SystemState single;
        single.fields = {p};
        auto s = solve_component(0, single, ell, mask, cfg);
        iters += s.iterations;
        out.push_back(std::move(s.field));
    }
    return out;
}

} // namespace detail

/// Damped Picard iteration of the component map until every residual is <= outer_tol.
/// `initial` supplies interior values (warm start); otherwise the uncoupled extension is used.
inline SystemState fixed_point_solve(std::span<const ScalarField> phi, double epsilon, const Ellipticity& ell,
                                     const DomainMask& mask, const SolveConfig& cfg,
                                     const SystemState* initial = nullptr) {
    cfg.validate();
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    detail::check_phi(phi, mask);

    SystemState state;
    state.epsilon = epsilon;
    if (initial) {
        if (initial->d() != static_cast<int>(phi.size())) throw InvalidArgument("warm start has wrong population count");
        state.fields = initial->fields;
        for (std::size_t i = 0; i < phi.size(); ++i)
            for (std::size_t k : mask.boundary_nodes()) state.fields[i][k] = phi[i][k];
    } else {
        state.fields = detail::uncoupled_extension(phi, ell, mask, cfg, state.inner_iters);
    }

    double damping = cfg.damping;
    state.residual = residual(state, ell, mask);
    double prev = *std::max_element(state.residual.begin(), state.residual.end());
    for (int i = 0; i < state.d(); ++i) state.log.push_back({epsilon, 0, i, state.residual[i], 0});
    int rises = 0;
    const int d = state.d();
    while (prev > cfg.outer_tol && state.outer_iters < cfg.max_outer) {
        ++state.outer_iters;
        const SystemState frozen = state;
        for (int i = 0; i < d; ++i) {
            const SystemState& ref = cfg.sweep == OuterSweep::Jacobi ? frozen : state;
            SystemState probe;
            probe.epsilon = epsilon;
            probe.fields = ref.fields;
            probe.fields[i] = state.fields[i];
            auto sol = solve_component(i, probe, ell, mask, cfg);
            state.inner_iters += sol.iterations;
            for (std::size_t k : mask.interior_nodes())
                state.fields[i][k] = (1.0 - damping) * state.fields[i][k] + damping * sol.field[k];
            state.log.push_back({epsilon, state.outer_iters, i, sol.residual, sol.iterations});
        }
        state.residual = residual(state, ell, mask);
        const double now = *std::max_element(state.residual.begin(), state.residual.end());
        rises = now > prev ? rises + 1 : 0;
        if (rises >= 2) {
            damping *= 0.5;
            rises = 0;
        }
        prev = now;
    }
    state.converged = prev <= cfg.outer_tol;
    return state;
}

inline SystemState fixed_point_solve(const std::vector<ScalarField>& phi, double epsilon, const Ellipticity& ell,
                                     const DomainMask& mask, const SolveConfig& cfg,
                                     const SystemState* initial = nullptr) {
    return fixed_point_solve(std::span<const ScalarField>(phi), epsilon, ell, mask, cfg, initial);
}

/// Solves along a strictly decreasing epsilon schedule, warm-starting each solve from the last.
inline std::vector<SystemState> epsilon_continuation(std::span<const ScalarField> phi, std::span<const double> schedule,
                                                     const Ellipticity& ell, const DomainMask& mask,
                                                     const SolveConfig& cfg) {
    if (schedule.empty()) throw InvalidArgument("empty epsilon schedule");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (!(schedule[k] > 0.0)) throw InvalidArgument("epsilon schedule must be positive");
        if (k > 0 && !(schedule[k] < schedule[k - 1]))
            throw InvalidArgument("epsilon schedule must be strictly decreasing");
    }
    std::vector<SystemState> states;
    states.reserve(schedule.size());
    for (double eps : schedule)
        states.push_back(fixed_point_solve(phi, eps, ell, mask, cfg, states.empty() ? nullptr : &states.back()));
    return states;
}

inline std::vector<SystemState> epsilon_continuation(const std::vector<ScalarField>& phi,
                                                     const std::vector<double>& schedule, const Ellipticity& ell,
                                                     const DomainMask& mask, const SolveConfig& cfg) {
    return epsilon_continuation(std::span<const ScalarField>(phi), std::span<const double>(schedule), ell, mask, cfg);
}

} // namespace seglab
