#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seglab/barriers.hpp"
#include "seglab/errors.hpp"
#include "seglab/io.hpp"
#include "seglab/pucci.hpp"

namespace seglab {

struct VerifyOptions {
    std::uint64_t seed = 1;
    int samples = 10000;
    double tolerance = 1e-10;
    double barrier_h = 1.0 / 128.0;
    double alpha_scale = 1.0; ///< multiplies every preset exponent; < 1 pushes presets below the floor
    Ellipticity ell{1.0, 2.0};
};

struct VerifyRow {
    std::string check;
    std::string detail;
    double worst = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool control = false; ///< negative control: passes when the underlying check fails
};

struct VerifyReport {
    std::vector<VerifyRow> rows;

    bool all_pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.pass; });
    }

    void print(std::ostream& os) const {
        CsvBlock block("verify", {"check", "detail", "worst", "tolerance", "result"});
        for (const auto& r : rows)
            block.row({r.check, r.detail, format_real(r.worst), format_real(r.tolerance), r.pass ? "PASS" : "FAIL"});
        block.param("rows", std::to_string(rows.size())).param("status", all_pass() ? "PASS" : "FAIL");
        block.write(os);
    }
};

namespace detail {

/// Q^T H Q with Q a product of random plane rotations; exact congruence up to rounding.
inline SymMatrix random_rotation(const SymMatrix& H, std::mt19937_64& rng) {
    const int n = H.dim();
    std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = H(i, j);
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) {
            const double t = angle(rng), c = std::cos(t), s = std::sin(t);
            for (int k = 0; k < n; ++k) {
                const double x = A(k, p), y = A(k, q);
                A(k, p) = c * x - s * y;
                A(k, q) = s * x + c * y;
            }
            for (int k = 0; k < n; ++k) {
                const double x = A(p, k), y = A(q, k);
                A(p, k) = c * x - s * y;
                A(q, k) = s * x + c * y;
            }
        }
    SymMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) out(i, j) = 0.5 * (A(i, j) + A(j, i));
    return out;
}

inline SymMatrix random_symmetric(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = u(rng);
    return m;
}

/// B^T B: positive semidefinite.
inline SymMatrix random_psd(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> b(static_cast<std::size_t>(n) * n);
    for (double& x : b) x = u(rng);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += b[static_cast<std::size_t>(k) * n + i] * b[static_cast<std::size_t>(k) * n + j];
            m(i, j) = s;
        }
    return m;
}

inline Ellipticity random_ellipticity(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 5.0);
    const double a = u(rng), b = u(rng);
    return {std::min(a, b), std::max(a, b)};
}

} // namespace detail

/// Worst violation of each Pucci law over `samples` random (H, G, N, t, lambda, Lambda) draws
/// in dimensions 2 to 4. Inequalities count only their wrong-sign excess.
inline std::vector<VerifyRow> pucci_algebra_checks(std::uint64_t seed, int samples, double tol) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(2, 4);
    std::uniform_real_distribution<double> scale(0.0, 3.0);
    double reflection = 0.0, chain = 0.0, rotation = 0.0, homogeneity = 0.0, ellipticity = 0.0, ordering = 0.0;
    double definite = 0.0;
    auto excess = [](double lhs, double rhs) { return std::max(0.0, lhs - rhs); }; // lhs <= rhs
    for (int s = 0; s < samples; ++s) {
        const int n = dim(rng);
        const Ellipticity ell = detail::random_ellipticity(rng);
        const SymMatrix H = detail::random_symmetric(n, rng);
        const SymMatrix G = detail::random_symmetric(n, rng);
        const SymMatrix N = detail::random_psd(n, rng);
        const double t = scale(rng);

        const double mH = pucci_minus(H, ell), pH = pucci_plus(H, ell);
        const double mG = pucci_minus(G, ell), pG = pucci_plus(G, ell);
        const SymMatrix HG = H + G;
        const double mHG = pucci_minus(HG, ell), pHG = pucci_plus(HG, ell);

        reflection = std::max(reflection, std::abs(pucci_minus(-H, ell) + pH));
        chain = std::max({chain, excess(mH + mG, mHG), excess(mHG, pH + mG), excess(pH + mG, pHG), excess(pHG, pH + pG)});
        rotation = std::max(rotation, std::abs(pucci_minus(detail::random_rotation(H, rng), ell) - mH));
        homogeneity = std::max({homogeneity, std::abs(pucci_minus(t * H, ell) - t * mH),
                                std::abs(pucci_plus(t * H, ell) - t * pH)});
        const double trN = N.trace();
        const double mHN = pucci_minus(H + N, ell);
        ellipticity = std::max({ellipticity, excess(mH + ell.lambda * trN, mHN), excess(mHN, mH + ell.Lambda * trN)});
        ordering = std::max(ordering, excess(mH, pH));
        definite = std::max({definite, std::abs(pucci_minus(N, ell) - ell.lambda * trN),
                             std::abs(pucci_plus(N, ell) - ell.Lambda * trN)});
    }
    const std::string detail = std::to_string(samples) + " samples";
    auto row = [&](const char* name, double worst) { return VerifyRow{name, detail, worst, tol, worst <= tol, false}; };
    return {row("pucci.reflection", reflection),     row("pucci.additivity_chain", chain),
            row("pucci.rotation_invariance", rotation), row("pucci.homogeneity", homogeneity),
            row("pucci.ellipticity_bounds", ellipticity), row("pucci.minus_le_plus", ordering),
            row("pucci.semidefinite_trace", definite)};
}

namespace detail {

inline std::string barrier_label(const BarrierSpec& s) {
    std::ostringstream os;
    os << "a=" << s.a << " b=" << s.b << " alpha=" << s.alpha << " lambda=" << s.ell.lambda
       << " Lambda=" << s.ell.Lambda << " n=" << s.n;
    return os.str();
}

} // namespace detail

/// Barrier presets: (a, b) in {(1, 2), (1, 5)}, alpha in {min, min + 1}, both kinds.
/// The last row is a negative control with alpha = min / 2 that must fail verification.
inline std::vector<VerifyRow> barrier_preset_checks(const Ellipticity& ell, double h, double alpha_scale) {
    std::vector<VerifyRow> rows;
    const double amin = min_alpha(ell, 2);
    for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{1.0, 5.0}})
        for (double alpha : {amin, amin + 1.0})
            for (BarrierKind kind : {BarrierKind::Sub, BarrierKind::Super}) {
                BarrierSpec spec{1.0, 1.0, a, b, alpha * alpha_scale, ell, 2};
                const auto profile = kind == BarrierKind::Sub ? subsolution_barrier(spec, Admissibility::Unchecked)
                                                              : supersolution_barrier(spec, Admissibility::Unchecked);
                const auto rep = verify_barrier(profile, spec, h);
                rows.push_back({std::string("barrier.") + to_string(kind), detail::barrier_label(spec), rep.worst_violation,
                                rep.tolerance, rep.pass, false});
            }
    BarrierSpec bad{1.0, 1.0, 1.0, 2.0, 0.5 * amin, ell, 2};
    const auto rep = verify_barrier(subsolution_barrier(bad, Admissibility::Unchecked), bad, h);
    rows.push_back({"barrier.sub.control", detail::barrier_label(bad), rep.worst_violation, rep.tolerance, !rep.pass, true});
    return rows;
}

inline VerifyReport verify_suite(const VerifyOptions& opt = {}) {
    if (opt.samples < 1) throw InvalidArgument("sample count must be >= 1");
    if (!(opt.alpha_scale > 0.0)) throw InvalidArgument("alpha scale must be positive");
    VerifyReport rep;
    for (auto& r : pucci_algebra_checks(opt.seed, opt.samples, opt.tolerance)) rep.rows.push_back(std::move(r));
    for (auto& r : barrier_preset_checks(opt.ell, opt.barrier_h, opt.alpha_scale)) rep.rows.push_back(std::move(r));
    return rep;
}

} // namespace seglab
