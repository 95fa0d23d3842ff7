#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "seglab/errors.hpp"
#include "seglab/geometry.hpp"
#include "seglab/pucci.hpp"
#include "seglab/solver.hpp"

namespace seglab {

// ---------------------------------------------------------------------------
// segregation

/// Area of the union over pairs i < j of {u_i > delta} and {u_j > delta}, over interior nodes.
inline double support_overlap(const SystemState& state, const DomainMask& mask, double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("support threshold must be positive");
    const double h = mask.grid().h();
    std::size_t count = 0;
    for (std::size_t k : mask.interior_nodes()) {
        int above = 0;
        for (const auto& f : state.fields) above += f[k] > delta ? 1 : 0;
        if (above >= 2) ++count;
    }
    return static_cast<double>(count) * h * h;
}

/// h^2 * sum over interior nodes of (1/eps) sum_{i<j} u_i u_j.
inline double interaction_mass(const SystemState& state, const DomainMask& mask) {
    const double h = mask.grid().h();
    double sum = 0.0;
    for (std::size_t k : mask.interior_nodes())
        for (int i = 0; i < state.d(); ++i)
            for (int j = i + 1; j < state.d(); ++j) sum += state.fields[i][k] * state.fields[j][k];
    return sum * h * h / state.epsilon;
}

/// Smallest threshold at which no interior node carries two populations above it.
inline double separation_threshold(const SystemState& state, const DomainMask& mask) {
    double t = 0.0;
    for (std::size_t k : mask.interior_nodes()) {
        double first = 0.0, second = 0.0;
        for (const auto& f : state.fields) {
            const double v = f[k];
            if (v > first) second = first, first = v;
            else if (v > second) second = v;
        }
        t = std::max(t, second);
    }
    return t;
}

/// Default support threshold max(10 outer_tol, 1e-3 sup phi).
inline double default_support_threshold(double outer_tol, double sup_phi) {
    return std::max(10.0 * outer_tol, 1e-3 * sup_phi);
}

// ---------------------------------------------------------------------------
// free boundary and growth

/// Interior nodes with field <= delta that have a 4-neighbour with field > delta.
inline std::vector<Node> free_boundary_points(const ScalarField& field, const DomainMask& mask, double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("free boundary threshold must be positive");
    const Grid& g = mask.grid();
    std::vector<Node> out;
    for (std::size_t k : mask.interior_nodes()) {
        if (field[k] > delta) continue;
        const Node n = g.node(k);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int q = 0; q < 4; ++q) {
            const int i = n.i + di[q], j = n.j + dj[q];
            if (mask.at(i, j) == NodeClass::Exterior) continue;
            if (field(i, j) > delta) {
                out.push_back(n);
                break;
            }
        }
    }
    return out;
}

/// Free-boundary node nearest to `target`; throws when there is none.
inline Node nearest_free_boundary_point(const ScalarField& field, const DomainMask& mask, double delta, Point target) {
    const auto pts = free_boundary_points(field, mask, delta);
    if (pts.empty()) throw HypothesisError("field has no free-boundary node at this threshold");
    const Grid& g = mask.grid();
    return *std::min_element(pts.begin(), pts.end(), [&](Node a, Node b) {
        return distance(g.position(a), target) < distance(g.position(b), target);
    });
}

/// Free-boundary node of u_i at the separation threshold nearest the domain centre: the
/// discrete interface between population i and the others.
inline Node interface_node(const SystemState& state, const DomainMask& mask, int i = 0) {
    const double sep = std::max(separation_threshold(state, mask), 1e-12);
    return nearest_free_boundary_point(state.fields.at(i), mask, sep, mask.center());
}

/// (u - t)^+ at active nodes, 0 elsewhere.
inline ScalarField positive_part(const ScalarField& u, const DomainMask& mask, double t) {
    ScalarField out(u.grid());
    for (std::size_t k = 0; k < u.grid().size(); ++k)
        if (mask.is_active(k)) out[k] = std::max(u[k] - t, 0.0);
    return out;
}

struct GrowthRow {
    double R = 0.0;
    double sup = 0.0;
    double ratio = 0.0; ///< sup / R
};

struct GrowthProfile {
    Point center{};
    std::vector<GrowthRow> rows;
    std::vector<double> skipped; ///< radii whose ball leaves the domain
    double C = 0.0;              ///< max ratio

    /// max ratio / min ratio over the kept radii (1 when fewer than two rows).
    double ratio_spread() const {
        if (rows.size() < 2) return 1.0;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& r : rows) lo = std::min(lo, r.ratio), hi = std::max(hi, r.ratio);
        return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
};

/// sup over B_R(x0) of `field` for each radius, and the ratio sup / R. A radius whose ball
/// reaches past the boundary layer of the disk is skipped.
inline GrowthProfile linear_growth_profile(const ScalarField& field, const DomainMask& mask, Node x0,
                                           std::span<const double> radii) {
    const Grid& g = mask.grid();
    GrowthProfile out;
    out.center = g.position(x0);
    double last = -std::numeric_limits<double>::infinity();
    for (double R : radii) {
        if (!(R > last)) throw InvalidArgument("growth radii must be strictly increasing");
        if (R < 2.0 * g.h() * (1.0 - 1e-12)) throw InvalidArgument("growth radii must be >= 2h");
        last = R;
        if (distance(out.center, mask.center()) + R > mask.radius() + g.h()) {
            out.skipped.push_back(R);
            continue;
        }
        double sup = -std::numeric_limits<double>::infinity();
        for_each_in_ball(mask, out.center, R, [&](std::size_t k) { sup = std::max(sup, field[k]); });
        out.rows.push_back({R, sup, sup / R});
        out.C = std::max(out.C, sup / R);
    }
    return out;
}

/// Largest difference quotient |f(p) - f(q)| / h over axis-adjacent node pairs inside the ball.
inline double lipschitz_norm_estimate(const ScalarField& field, const DomainMask& mask, Point center, double radius) {
    const Grid& g = mask.grid();
    const double r2 = radius * radius + 1e-9 * g.h() * g.h();
    auto inside = [&](int i, int j) {
        if (mask.at(i, j) == NodeClass::Exterior) return false;
        const double dx = g.x(i) - center.x, dy = g.y(j) - center.y;
        return dx * dx + dy * dy <= r2;
    };
    double best = 0.0;
    bool any = false;
    for_each_in_ball(mask, center, radius, [&](std::size_t k) {
        const Node n = g.node(k);
        any = true;
        if (inside(n.i + 1, n.j)) best = std::max(best, std::abs(field(n.i + 1, n.j) - field[k]));
        if (inside(n.i, n.j + 1)) best = std::max(best, std::abs(field(n.i, n.j + 1) - field[k]));
    });
    if (!any) throw InvalidArgument("region contains no domain node");
    return best / g.h();
}

// ---------------------------------------------------------------------------
// Holder decay

struct HolderEstimate {
    Point center{};
    std::vector<double> radii;
    std::vector<double> oscillations;
    double alpha_hat = 0.0;
    double constant = 0.0;
    double fit_residual = 0.0; ///< RMS of log-log residuals
    int k_max_requested = 0;
    int k_max_used = 0;
};

/// Least-squares fit log osc(B_r) = log C + alpha log r over r = 2^-1, ..., 2^-k_max.
/// k_max is reduced until the smallest ball is at least 4h across.
inline HolderEstimate holder_exponent_estimate(const ScalarField& field, const DomainMask& mask, Point center,
                                               int k_max) {
    if (k_max < 2) throw InvalidArgument("need at least two dyadic radii");
    const double h = mask.grid().h();
    HolderEstimate est;
    est.center = center;
    est.k_max_requested = k_max;
    int used = k_max;
    while (used >= 2 && 2.0 * std::ldexp(1.0, -used) < 4.0 * h * (1.0 - 1e-12)) --used;
    if (used < 2) throw InvalidArgument("grid too coarse for two dyadic radii");
    est.k_max_used = used;

    std::vector<double> lx, ly;
    for (int k = 1; k <= used; ++k) {
        const double r = std::ldexp(1.0, -k);
        const double osc = oscillation(field, mask, center, r);
        est.radii.push_back(r);
        est.oscillations.push_back(osc);
        if (osc > 0.0) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(osc));
        }
    }
    if (lx.size() < 2) throw HypothesisError("oscillation vanishes; exponent undefined");
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t q = 0; q < lx.size(); ++q) {
        sxx += (lx[q] - mx) * (lx[q] - mx);
        sxy += (lx[q] - mx) * (ly[q] - my);
    }
    est.alpha_hat = sxy / sxx;
    const double intercept = my - est.alpha_hat * mx;
    est.constant = std::exp(intercept);
    double ss = 0.0;
    for (std::size_t q = 0; q < lx.size(); ++q) {
        const double e = ly[q] - (intercept + est.alpha_hat * lx[q]);
        ss += e * e;
    }
    est.fit_residual = std::sqrt(ss / n);
    return est;
}

// ---------------------------------------------------------------------------
// subharmonicity and thin supports

/// Minimum of the five-point Laplacian over stencil-complete interior nodes.
inline double subharmonicity_check(const ScalarField& field, const DomainMask& mask) {
    const Grid& g = mask.grid();
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k : mask.stencil_nodes()) {
        const Node n = g.node(k);
        m = std::min(m, laplacian_at(field, n.i, n.j));
    }
    return m;
}

struct ThinSupportReport {
    double support_fraction = 0.0;
    double sup_outer = 0.0; ///< sup over B_rho
    double sup_inner = 0.0; ///< sup over B_rho/2
    double bound = 0.0;     ///< N rho eps0 2^n (1 + 4h)
    bool pass = false;
};

/// L-infinity decay of a non-negative subharmonic function with small support in B_rho(center):
/// if sup_{B_rho} u <= N rho and |{u != 0} cap B_rho| <= eps0 |B_rho| then
/// sup_{B_rho/2} u <= N rho eps0 2^n, checked with n = 2 and slack factor 1 + 4h.
inline ThinSupportReport thin_support_decay_check(const ScalarField& field, const DomainMask& mask, Point center,
                                                  double eps0, double rho = 1.0, double N = 1.0) {
    if (!(eps0 > 0.0)) throw InvalidArgument("eps0 must be positive");
    const Grid& g = mask.grid();
    ThinSupportReport rep;
    std::size_t total = 0, support = 0;
    double min_value = std::numeric_limits<double>::infinity();
    double min_lap = std::numeric_limits<double>::infinity();
    for_each_in_ball(mask, center, rho, [&](std::size_t k) {
        ++total;
        if (field[k] != 0.0) ++support;
        min_value = std::min(min_value, field[k]);
        rep.sup_outer = std::max(rep.sup_outer, field[k]);
        if (mask.is_interior(k) && mask.stencil_complete(k)) {
            const Node n = g.node(k);
            min_lap = std::min(min_lap, laplacian_at(field, n.i, n.j));
        }
    });
    if (total == 0) throw InvalidArgument("ball contains no domain node");
    rep.support_fraction = static_cast<double>(support) / static_cast<double>(total);
    if (min_value < 0.0) throw HypothesisError("hypothesis failed: field is negative somewhere in the ball");
    if (min_lap < -1e-8) throw HypothesisError("hypothesis failed: field is not subharmonic in the ball");
    if (rep.sup_outer > N * rho * (1.0 + 1e-12))
        throw HypothesisError("hypothesis failed: sup over the ball exceeds N rho");
    if (rep.support_fraction > eps0)
        throw HypothesisError("hypothesis failed: support fraction " + std::to_string(rep.support_fraction) +
                              " exceeds eps0 " + std::to_string(eps0));
    for_each_in_ball(mask, center, 0.5 * rho, [&](std::size_t k) { rep.sup_inner = std::max(rep.sup_inner, field[k]); });
    rep.bound = N * rho * eps0 * 4.0 * (1.0 + 4.0 * g.h());
    rep.pass = rep.sup_inner <= rep.bound;
    return rep;
}

// ---------------------------------------------------------------------------
// monotonicity functional

struct AcfCurve {
    Point center{};
    std::vector<double> radii;
    std::vector<double> J;
    std::vector<double> factor_u;
    std::vector<double> factor_v;
    double bound = 0.0; ///< 4096 ||u||^2 ||v||^2 over B_1(center), valid for radii <= 1/2

    /// Largest relative drop J[k] < J[k-1], as a fraction of J[k-1] (0 when non-decreasing).
    double worst_relative_drop() const {
        double w = 0.0;
        for (std::size_t k = 1; k < J.size(); ++k)
            if (J[k - 1] > 0.0) w = std::max(w, (J[k - 1] - J[k]) / J[k - 1]);
        return w;
    }
};

inline constexpr int acf_subcells = 8;

/// Product of the averaged Dirichlet energies (1/rho^2 int_{B_rho} |grad u|^2)(1/rho^2 int_{B_rho} |grad v|^2)
/// in the plane (the |x - center|^(2-n) weight is 1). Gradients are taken per lattice cell
/// from its four corners and integrated with the midpoint rule on an 8x8 subdivision of the
/// cell, so cells cut by the circle contribute their covered fraction. Cells with corners in
/// both supports are skipped. u and v must have disjoint positivity sets above `support_tol`.
inline AcfCurve acf_functional(const ScalarField& u, const ScalarField& v, const DomainMask& mask, Point center,
                               std::span<const double> radii, double support_tol = 0.0) {
    const Grid& g = mask.grid();
    const double h = g.h();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (u[k] < 0.0 || v[k] < 0.0) throw InvalidArgument("monotonicity functional needs non-negative inputs");
        if (mask.is_active(k) && u[k] > support_tol && v[k] > support_tol)
            throw InvalidArgument("monotonicity functional needs disjoint supports");
    }
    AcfCurve out;
    out.center = center;
    for (double rho : radii) {
        if (rho < 4.0 * h * (1.0 - 1e-12)) throw InvalidArgument("monotonicity radii must be >= 4h");
        double eu = 0.0, ev = 0.0;
        const int i0 = std::max(0, static_cast<int>(std::floor((center.x - rho - g.origin().x) / h)) - 1);
        const int i1 = std::min(g.nx() - 2, static_cast<int>(std::ceil((center.x + rho - g.origin().x) / h)) + 1);
        const int j0 = std::max(0, static_cast<int>(std::floor((center.y - rho - g.origin().y) / h)) - 1);
        const int j1 = std::min(g.ny() - 2, static_cast<int>(std::ceil((center.y + rho - g.origin().y) / h)) + 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                if (mask.at(i, j) == NodeClass::Exterior || mask.at(i + 1, j) == NodeClass::Exterior ||
                    mask.at(i, j + 1) == NodeClass::Exterior || mask.at(i + 1, j + 1) == NodeClass::Exterior)
                    continue;
                const double cu[4] = {u(i, j), u(i + 1, j), u(i, j + 1), u(i + 1, j + 1)};
                const double cv[4] = {v(i, j), v(i + 1, j), v(i, j + 1), v(i + 1, j + 1)};
                bool in_u = false, in_v = false;
                for (int q = 0; q < 4; ++q) in_u |= cu[q] > support_tol, in_v |= cv[q] > support_tol;
                if (in_u && in_v) continue;
                // covered fraction of the cell
                int covered = 0;
                for (int sj = 0; sj < acf_subcells; ++sj)
                    for (int si = 0; si < acf_subcells; ++si) {
                        const double x = g.x(i) + (si + 0.5) * h / acf_subcells - center.x;
                        const double y = g.y(j) + (sj + 0.5) * h / acf_subcells - center.y;
                        covered += x * x + y * y <= rho * rho ? 1 : 0;
                    }
                if (covered == 0) continue;
                const double area = h * h * covered / double(acf_subcells * acf_subcells);
                auto energy = [&](const double* c) {
                    const double gx = ((c[1] - c[0]) + (c[3] - c[2])) / (2.0 * h);
                    const double gy = ((c[2] - c[0]) + (c[3] - c[1])) / (2.0 * h);
                    return gx * gx + gy * gy;
                };
                eu += energy(cu) * area;
                ev += energy(cv) * area;
            }
        out.radii.push_back(rho);
        out.factor_u.push_back(eu / (rho * rho));
        out.factor_v.push_back(ev / (rho * rho));
        out.J.push_back(out.factor_u.back() * out.factor_v.back());
    }
    // Caccioppoli: int_{B_1/2} |grad w|^2 <= 16 int_{B_1} w^2 for subharmonic w >= 0; with
    // J monotone, J(rho) <= J(1/2) <= (4 * 16)^2 ||u||^2 ||v||^2.
    double nu = 0.0, nv = 0.0;
    for_each_in_ball(mask, center, 1.0, [&](std::size_t k) {
        nu += u[k] * u[k];
        nv += v[k] * v[k];
    });
    out.bound = 4096.0 * nu * nv * h * h * h * h;
    return out;
}

// ---------------------------------------------------------------------------
// limit problem

struct LimitResidual {
    double interior_residual = 0.0;  ///< max |M^-(u_i)| deep inside {u_i > delta}
    double coupling_magnitude = 0.0; ///< max (1/eps) u_i sum_{j!=i} u_j over the same nodes
    double supersolution_max = 0.0;  ///< max M^-(u_i - sum_{k!=i} u_k) over stencil nodes
    int interior_nodes = 0;
};

/// Limit-problem surrogates: the Pucci equation away from the other supports, and the
/// supersolution inequality for u_i minus the other densities.
inline LimitResidual limit_residual(const SystemState& state, const Ellipticity& ell, const DomainMask& mask,
                                    double delta) {
    if (!(delta > 0.0)) throw InvalidArgument("support threshold must be positive");
    const Grid& g = mask.grid();
    LimitResidual out;
    out.supersolution_max = -std::numeric_limits<double>::infinity();
    const int d = state.d();
    for (std::size_t k : mask.stencil_nodes()) {
        const Node n = g.node(k);
        for (int i = 0; i < d; ++i) {
            const ScalarField& ui = state.fields[i];
            Hessian2 diff = hessian_at(ui, n.i, n.j);
            double others = 0.0;
            for (int j = 0; j < d; ++j) {
                if (j == i) continue;
                const Hessian2 Hj = hessian_at(state.fields[j], n.i, n.j);
                diff.xx -= Hj.xx, diff.xy -= Hj.xy, diff.yy -= Hj.yy;
                others += state.fields[j][k];
            }
            out.supersolution_max = std::max(out.supersolution_max, pucci_minus(diff, ell));

            bool deep = true;
            for (int dj = -1; dj <= 1 && deep; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (!(ui(n.i + di, n.j + dj) > delta)) {
                        deep = false;
                        break;
                    }
            if (!deep) continue;
            ++out.interior_nodes;
            out.interior_residual = std::max(out.interior_residual, std::abs(pucci_minus(hessian_at(ui, n.i, n.j), ell)));
            out.coupling_magnitude = std::max(out.coupling_magnitude, ui[k] * others / state.epsilon);
        }
    }
    if (mask.stencil_nodes().empty()) out.supersolution_max = 0.0;
    return out;
}

} // namespace seglab
