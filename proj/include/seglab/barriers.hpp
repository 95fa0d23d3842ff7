#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "seglab/errors.hpp"
#include "seglab/geometry.hpp"
#include "seglab/pucci.hpp"

namespace seglab {

/// Parameters of the radial ring barriers: amplitude M, outer scale r, ring ratio a/b,
/// decay exponent alpha, ellipticity and space dimension n.
struct BarrierSpec {
    double M = 1.0;
    double r = 1.0;
    double a = 1.0;
    double b = 2.0;
    double alpha = 1.0;
    Ellipticity ell{};
    int n = 2;

    double ratio() const noexcept { return a / b; }
    double inner_radius() const noexcept { return a * r / b; }
    double outer_radius() const noexcept { return r; }
};

inline constexpr double alpha_floor_slack = 1e-9;

/// Smallest admissible decay exponent: max((Lambda (n-1) - lambda) / lambda, n - 2 + 1e-9).
inline double min_alpha(const Ellipticity& ell, int n) {
    if (n < 2) throw InvalidArgument("dimension must be >= 2");
    const double pucci_bound = (ell.Lambda * (n - 1) - ell.lambda) / ell.lambda;
    return std::max(pucci_bound, n - 2 + alpha_floor_slack);
}

enum class BarrierKind : std::uint8_t { Sub, Super };

inline const char* to_string(BarrierKind k) { return k == BarrierKind::Sub ? "sub" : "super"; }

/// Whether construction enforces alpha >= min_alpha. Unchecked exists for negative controls.
enum class Admissibility : std::uint8_t { Enforce, Unchecked };

/// Closed-form radial profile psi(x) = M r phi(|x| / r) with
///   sub:   phi(s) = -M2 + M2 s^-alpha      (psi = r M at |x| = a r / b, 0 at |x| = r)
///   super: phi(s) = 1 + M2 - M2 s^-alpha   (psi = 0 at |x| = a r / b, r M at |x| = r)
/// and M2 = a^alpha / (b^alpha - a^alpha).
class RadialProfile {
public:
    RadialProfile(BarrierKind kind, double M, double r, double a, double b, double alpha)
        : kind_(kind), M_(M), r_(r), a_(a), b_(b), alpha_(alpha) {
        const double aa = std::pow(a, alpha);
        M2_ = aa / (std::pow(b, alpha) - aa);
        M1_ = kind == BarrierKind::Sub ? -M2_ : 1.0 + M2_;
    }

    BarrierKind kind() const noexcept { return kind_; }
    double M1() const noexcept { return M1_; }
    double M2() const noexcept { return M2_; }
    double alpha() const noexcept { return alpha_; }
    double amplitude() const noexcept { return M_; }
    double scale() const noexcept { return r_; }
    double inner_radius() const noexcept { return a_ * r_ / b_; }
    double outer_radius() const noexcept { return r_; }

    /// psi as a function of the radius rho > 0, evaluated as M r w (sub) or M r (1 - w) (super) with
    /// w = ((r/rho)^alpha - 1) / ((b/a)^alpha - 1); expm1 keeps both ring radii exact to a few ulps.
    double value(double rho) const {
        const double w = std::expm1(alpha_ * std::log(r_ / rho)) / std::expm1(alpha_ * std::log(b_ / a_));
        return M_ * r_ * (kind_ == BarrierKind::Sub ? w : 1.0 - w);
    }
    double value(Point x) const { return value(std::hypot(x.x, x.y)); }

    /// d psi / d rho.
    double radial_derivative(double rho) const {
        const double s = rho / r_;
        const double d = alpha_ * M2_ * std::pow(s, -alpha_ - 1.0);
        return M_ * (kind_ == BarrierKind::Sub ? -d : d);
    }
    /// d^2 psi / d rho^2.
    double second_radial_derivative(double rho) const {
        const double s = rho / r_;
        const double d = alpha_ * (alpha_ + 1.0) * M2_ * std::pow(s, -alpha_ - 2.0) / r_;
        return M_ * (kind_ == BarrierKind::Sub ? d : -d);
    }
    /// |d^4 psi / d rho^4|.
    double fourth_radial_derivative_abs(double rho) const {
        const double s = rho / r_;
        return std::abs(M_) * alpha_ * (alpha_ + 1.0) * (alpha_ + 2.0) * (alpha_ + 3.0) * M2_ *
               std::pow(s, -alpha_ - 4.0) / (r_ * r_ * r_);
    }

    /// Exact Hessian in n = 2 at x: psi'' along x/|x|, psi'/|x| across it.
    Hessian2 hessian(Point x) const {
        const double rho = std::hypot(x.x, x.y);
        const double radial = second_radial_derivative(rho);
        const double tangential = radial_derivative(rho) / rho;
        const double ex = x.x / rho, ey = x.y / rho;
        return {radial * ex * ex + tangential * ey * ey, (radial - tangential) * ex * ey,
                radial * ey * ey + tangential * ex * ex};
    }

    /// Radius where the boundary slope is prescribed: outer for sub, inner for super.
    double slope_radius() const noexcept { return kind_ == BarrierKind::Sub ? outer_radius() : inner_radius(); }

    /// Slope constant c with d psi / d nu = c M on the slope radius (nu = x/|x|):
    /// sub: -alpha a^alpha / (b^alpha - a^alpha); super: alpha / ((a/b) - (a/b)^(alpha+1)).
    double slope_constant() const {
        if (kind_ == BarrierKind::Sub) return -alpha_ * M2_;
        const double q = a_ / b_;
        return alpha_ / (q - std::pow(q, alpha_ + 1.0));
    }

    /// Declared boundary values (inner, outer).
    std::pair<double, double> declared_values() const {
        return kind_ == BarrierKind::Sub ? std::pair{r_ * M_, 0.0} : std::pair{0.0, r_ * M_};
    }

private:
    BarrierKind kind_;
    double M_, r_, a_, b_, alpha_;
    double M1_ = 0.0, M2_ = 0.0;
};

namespace detail {

inline void check_barrier_spec(const BarrierSpec& s, Admissibility adm) {
    if (s.n < 2) throw InvalidArgument("barrier dimension must be >= 2");
    if (!(s.r > 0.0) || !std::isfinite(s.r)) throw InvalidArgument("barrier scale r must be positive");
    if (!(s.a > 0.0 && s.a < s.b)) throw InvalidArgument("barrier ring requires 0 < a < b");
    if (!(s.M >= 0.0) || !std::isfinite(s.M)) throw InvalidArgument("barrier amplitude must be >= 0");
    if (!(s.alpha > 0.0) || !std::isfinite(s.alpha)) throw InvalidArgument("barrier exponent must be positive");
    if (adm == Admissibility::Enforce) {
        if (!(s.alpha > s.n - 2))
            throw InvalidArgument("barrier exponent must exceed n - 2");
        const double need = (s.ell.Lambda * (s.n - 1) - s.ell.lambda) / s.ell.lambda;
        if (s.alpha < need * (1.0 - 1e-12))
            throw InvalidArgument("barrier exponent " + std::to_string(s.alpha) + " below the ellipticity bound " +
                                  std::to_string(need));
    }
}

} // namespace detail

/// Radial subsolution on the ring a r / b <= |x| <= r: M^-(psi) >= 0 there.
inline RadialProfile subsolution_barrier(const BarrierSpec& spec, Admissibility adm = Admissibility::Enforce) {
    detail::check_barrier_spec(spec, adm);
    return RadialProfile(BarrierKind::Sub, spec.M, spec.r, spec.a, spec.b, spec.alpha);
}

/// Radial supersolution on the same ring: M^+(psi) <= 0 there.
inline RadialProfile supersolution_barrier(const BarrierSpec& spec, Admissibility adm = Admissibility::Enforce) {
    detail::check_barrier_spec(spec, adm);
    return RadialProfile(BarrierKind::Super, spec.M, spec.r, spec.a, spec.b, spec.alpha);
}

struct BarrierReport {
    BarrierKind kind = BarrierKind::Sub;
    BarrierSpec spec{};
    double h = 0.0;
    double worst_violation = 0.0; ///< largest wrong-sign value of the discrete operator
    double tolerance = 0.0;       ///< C_h h^2 allowance for truncation error
    int nodes_checked = 0;
    bool pass = false;
};

/// Exact-spectrum check for n >= 3: the Hessian of a radial profile has eigenvalue psi'' once
/// and psi' / rho with multiplicity n - 1. Radii are sampled with spacing h; the tolerance
/// only absorbs rounding.
inline BarrierReport verify_barrier_radial(const RadialProfile& profile, const BarrierSpec& spec, double h,
                                           double r_in) {
    BarrierReport rep;
    rep.kind = profile.kind();
    rep.spec = spec;
    rep.h = h;
    const double r_out = profile.outer_radius();
    const int steps = static_cast<int>(std::ceil((r_out - r_in) / h));
    std::vector<double> ev(static_cast<std::size_t>(spec.n));
    double scale = 0.0;
    for (int q = 0; q <= steps; ++q) {
        const double rho = std::min(r_in + q * h, r_out);
        ev[0] = profile.second_radial_derivative(rho);
        std::fill(ev.begin() + 1, ev.end(), profile.radial_derivative(rho) / rho);
        const double v = profile.kind() == BarrierKind::Sub ? -pucci_minus(ev, spec.ell) : pucci_plus(ev, spec.ell);
        rep.worst_violation = std::max(rep.worst_violation, v);
        scale = std::max(scale, spec.ell.Lambda * spec.n * std::abs(ev[0]) + spec.ell.Lambda * spec.n * std::abs(ev[1]));
        ++rep.nodes_checked;
    }
    rep.tolerance = 1e-12 * scale;
    rep.pass = rep.worst_violation <= rep.tolerance;
    return rep;
}

/// Safety factor applied to the truncation bound of the central-difference Hessian.
inline constexpr double barrier_truncation_factor = 4.0;

/// Samples `profile` on a lattice of spacing h centred at the origin, evaluates the discrete
/// Pucci operator of matching sign (M^- for sub, M^+ for super) at nodes of the ring and
/// reports the worst sign violation. PASS iff it is <= C_h h^2, where
///   C_h = factor * 2 Lambda * max_ring |psi''''| / 12 * sqrt(1 + 2 * 4 + 1)
/// bounds the Frobenius error of the Hessian stencil through the Lipschitz constant of
/// the operators. With `extend_inner` the ring reaches down to a r / (2 b).
inline BarrierReport verify_barrier(const RadialProfile& profile, const BarrierSpec& spec, double h,
                                    bool extend_inner = false) {
    const double r_in = profile.inner_radius() * (extend_inner ? 0.5 : 1.0);
    const double r_out = profile.outer_radius();
    if (!(h > 0.0) || !(h < (r_out - profile.inner_radius()) / 8.0))
        throw InvalidArgument("ring under-resolved: need h < (r - a r / b) / 8");
    if (spec.n != 2) return verify_barrier_radial(profile, spec, h, r_in);

    const int half = static_cast<int>(std::ceil(r_out / h)) + 1;
    const int n = 2 * half + 1;
    Grid grid(n, n, h, {-half * h, -half * h});
    ScalarField psi(grid);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double rho = std::hypot(grid.x(i), grid.y(j));
            psi(i, j) = rho > 0.0 ? profile.value(rho) : 0.0;
        }

    const double d4 = profile.fourth_radial_derivative_abs(std::max(r_in - h, 0.5 * r_in));
    const double hessian_err = d4 / 12.0 * std::sqrt(1.0 + 2.0 * 4.0 + 1.0);
    const double tol = barrier_truncation_factor * 2.0 * spec.ell.Lambda * hessian_err * h * h;

    BarrierReport rep;
    rep.kind = profile.kind();
    rep.spec = spec;
    rep.h = h;
    rep.tolerance = tol;
    double worst = 0.0;
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
            const double rho = std::hypot(grid.x(i), grid.y(j));
            if (rho < r_in || rho > r_out) continue;
            const Hessian2 H = hessian_at(psi, i, j);
            const double v = profile.kind() == BarrierKind::Sub ? -pucci_minus(H, spec.ell) : pucci_plus(H, spec.ell);
            worst = std::max(worst, v);
            ++rep.nodes_checked;
        }
    rep.worst_violation = worst;
    rep.pass = worst <= tol;
    return rep;
}

inline std::string barrier_report_header() { return "kind,a,b,alpha,lambda,Lambda,n,h,worst_violation,pass"; }

inline std::string to_csv(const BarrierReport& r) {
    std::ostringstream os;
    os << std::setprecision(17) << to_string(r.kind) << ',' << r.spec.a << ',' << r.spec.b << ',' << r.spec.alpha
       << ',' << r.spec.ell.lambda << ',' << r.spec.ell.Lambda << ',' << r.spec.n << ',' << r.h << ','
       << r.worst_violation << ',' << (r.pass ? "PASS" : "FAIL");
    return os.str();
}

} // namespace seglab
