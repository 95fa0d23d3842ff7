#include <gtest/gtest.h>

#include "support.hpp"

using namespace seglab;
using namespace testing_support;

namespace {

BarrierSpec spec_of(double a, double b, double alpha, Ellipticity ell = {1.0, 2.0}, double M = 1.0, double r = 1.0,
                    int n = 2) {
    return {M, r, a, b, alpha, ell, n};
}

} // namespace

TEST(MinAlpha, FloorValues) {
    EXPECT_DOUBLE_EQ(min_alpha({1.0, 2.0}, 2), 1.0);
    EXPECT_DOUBLE_EQ(min_alpha({1.0, 4.0}, 2), 3.0);
    EXPECT_DOUBLE_EQ(min_alpha({1.0, 2.0}, 3), 3.0);
    EXPECT_DOUBLE_EQ(min_alpha({1.0, 1.0}, 2), alpha_floor_slack);
    EXPECT_DOUBLE_EQ(min_alpha({1.0, 1.0}, 3), 1.0 + alpha_floor_slack);
    EXPECT_DOUBLE_EQ(min_alpha({2.0, 2.0}, 4), 2.0 + alpha_floor_slack);
    EXPECT_THROW(min_alpha({1.0, 1.0}, 1), InvalidArgument);
}

TEST(SubBarrier, HalfRingExample) {
    const auto p = subsolution_barrier(spec_of(1, 2, 1));
    EXPECT_DOUBLE_EQ(p.M2(), 1.0);
    EXPECT_DOUBLE_EQ(p.value(0.5), 1.0);
    EXPECT_DOUBLE_EQ(p.value(1.0), 0.0);
    EXPECT_DOUBLE_EQ(p.slope_constant(), -1.0);
}

TEST(SubBarrier, FifthRingExample) {
    const auto p = subsolution_barrier(spec_of(1, 5, 2, {1.0, 3.0}));
    EXPECT_DOUBLE_EQ(p.M2(), 1.0 / 24.0);
    EXPECT_DOUBLE_EQ(p.slope_constant(), -1.0 / 12.0);
}

TEST(SuperBarrier, Examples) {
    const auto p = supersolution_barrier(spec_of(1, 2, 1));
    EXPECT_DOUBLE_EQ(p.value(0.5), 0.0);
    EXPECT_DOUBLE_EQ(p.value(1.0), 1.0);
    EXPECT_DOUBLE_EQ(p.slope_constant(), 4.0);
    const auto q = supersolution_barrier(spec_of(1, 5, 1));
    EXPECT_DOUBLE_EQ(q.slope_constant(), 25.0 / 4.0);
    for (double alpha : {1.0, 1.5, 3.0}) {
        const auto s = supersolution_barrier(spec_of(1, 5, alpha, {1.0, 1.0}));
        EXPECT_NEAR(s.slope_constant(), alpha / (0.2 - std::pow(0.2, alpha + 1)), 1e-12);
    }
}

TEST(Barriers, InadmissibleSpecsAreRejected) {
    EXPECT_THROW(subsolution_barrier(spec_of(1, 2, 0.5)), InvalidArgument);
    EXPECT_THROW(supersolution_barrier(spec_of(2, 1, 1)), InvalidArgument);
    EXPECT_THROW(subsolution_barrier(spec_of(1, 1, 1)), InvalidArgument);
    EXPECT_THROW(subsolution_barrier(spec_of(1, 2, 1, {1.0, 2.0}, -1.0)), InvalidArgument);
    EXPECT_THROW(subsolution_barrier(spec_of(1, 2, 1, {1.0, 2.0}, 1.0, 0.0)), InvalidArgument);
    EXPECT_THROW(subsolution_barrier(spec_of(1, 2, 2, {1.0, 1.0}, 1.0, 1.0, 4)), InvalidArgument); // alpha <= n - 2
    EXPECT_NO_THROW(subsolution_barrier(spec_of(1, 2, 0.5), Admissibility::Unchecked));
}

TEST(BarrierProperties, BoundaryValuesAreExact) {
    const double tol = 1e-14;
    for (double M : {0.5, 1.0, 7.0})
        for (double r : {0.3, 1.0, 2.5})
            for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{1.0, 5.0}, std::pair{2.0, 3.0}})
                for (double alpha : {1.0, 1.7, 4.0}) {
                    const auto spec = spec_of(a, b, alpha, {1.0, 2.0}, M, r);
                    for (const auto& p : {subsolution_barrier(spec), supersolution_barrier(spec)}) {
                        const auto [inner, outer] = p.declared_values();
                        EXPECT_LE(std::abs(p.value(p.inner_radius()) - inner), tol * (1 + std::abs(inner)));
                        EXPECT_LE(std::abs(p.value(p.outer_radius()) - outer), tol * (1 + std::abs(outer)));
                    }
                }
}

TEST(BarrierProperties, ScalingCovariance) {
    for (double t : {0.25, 2.0, 3.5}) {
        const auto base = spec_of(1, 3, 1.5);
        auto scaled = base;
        scaled.r = t * base.r;
        for (bool sub : {true, false}) {
            const auto p = sub ? subsolution_barrier(base) : supersolution_barrier(base);
            const auto q = sub ? subsolution_barrier(scaled) : supersolution_barrier(scaled);
            for (double rho : {0.34, 0.5, 0.8, 1.0}) EXPECT_NEAR(q.value(t * rho), t * p.value(rho), 1e-13);
        }
    }
}

TEST(BarrierProperties, RadialMonotonicity) {
    const auto spec = spec_of(1, 5, 2);
    const auto sub = subsolution_barrier(spec);
    const auto super = supersolution_barrier(spec);
    double prev_sub = 1e300, prev_super = -1e300;
    for (int k = 0; k <= 400; ++k) {
        const double rho = 0.2 + 0.8 * k / 400.0;
        EXPECT_LT(sub.value(rho), prev_sub);
        EXPECT_GT(super.value(rho), prev_super);
        prev_sub = sub.value(rho);
        prev_super = super.value(rho);
    }
}

TEST(BarrierProperties, SlopeMatchesCentredDifferencesAtSecondOrder) {
    for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{1.0, 5.0}})
        for (double alpha : {1.0, 2.5}) {
            const auto spec = spec_of(a, b, alpha, {1.0, 2.0}, 1.3, 0.8);
            for (const auto& p : {subsolution_barrier(spec), supersolution_barrier(spec)}) {
                const double R = p.slope_radius();
                const double want = p.slope_constant() * spec.M;
                auto fd = [&](double h) { return (p.value(R + h) - p.value(R - h)) / (2 * h); };
                const double e1 = std::abs(fd(1e-2) - want), e2 = std::abs(fd(5e-3) - want);
                EXPECT_NEAR(p.radial_derivative(R), want, 1e-12 * (1 + std::abs(want)));
                EXPECT_GT(e1 / e2, 3.5);
                EXPECT_LT(e1 / e2, 4.5);
            }
        }
}

TEST(BarrierProperties, ExactHessianGivesClosedFormOperator) {
    // M^-(psi) = M M2 alpha r^(alpha+1) rho^(-alpha-2) (lambda (alpha+1) - Lambda (n-1)) on the ring
    const Ellipticity ell{1.0, 3.0};
    const auto spec = spec_of(1, 4, 2.5, ell, 1.7, 1.2);
    const auto p = subsolution_barrier(spec);
    for (double rho : {0.3, 0.5, 0.9, 1.2})
        for (double th : {0.0, 0.7, 2.0}) {
            const Hessian2 H = p.hessian({rho * std::cos(th), rho * std::sin(th)});
            const double want = spec.M * p.M2() * spec.alpha * std::pow(spec.r, spec.alpha + 1) *
                                std::pow(rho, -spec.alpha - 2) * (ell.lambda * (spec.alpha + 1) - ell.Lambda);
            EXPECT_NEAR(pucci_minus(H, ell), want, 1e-11 * (1 + std::abs(want)));
        }
}

TEST(VerifyBarrier, AdmissibleSpecsPass) {
    for (BarrierKind kind : {BarrierKind::Sub, BarrierKind::Super}) {
        const auto spec = spec_of(1, 2, min_alpha({1.0, 2.0}, 2));
        const auto p = kind == BarrierKind::Sub ? subsolution_barrier(spec) : supersolution_barrier(spec);
        const auto rep = verify_barrier(p, spec, 1.0 / 64);
        EXPECT_TRUE(rep.pass) << to_csv(rep);
        EXPECT_GT(rep.nodes_checked, 1000);
        EXPECT_EQ(rep.kind, kind);
    }
}

TEST(VerifyBarrier, ExponentBelowFloorFailsAtEveryResolution) {
    const auto spec = spec_of(1, 2, 0.5 * min_alpha({1.0, 2.0}, 2));
    const auto p = subsolution_barrier(spec, Admissibility::Unchecked);
    std::vector<double> worst;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        const auto rep = verify_barrier(p, spec, h);
        EXPECT_FALSE(rep.pass);
        worst.push_back(rep.worst_violation);
    }
    // bounded away from zero as h -> 0
    EXPECT_GT(worst.back(), 0.5 * worst.front());
}

TEST(VerifyBarrier, UnderResolvedRingIsAnError) {
    const auto spec = spec_of(1, 2, 1);
    EXPECT_THROW(verify_barrier(subsolution_barrier(spec), spec, 0.0625), InvalidArgument);
    EXPECT_THROW(verify_barrier(subsolution_barrier(spec), spec, 0.0), InvalidArgument);
}

TEST(VerifyBarrier, ExtendedRingStillPasses) {
    const auto spec = spec_of(1, 2, 2);
    const auto rep = verify_barrier(subsolution_barrier(spec), spec, 1.0 / 64, true);
    EXPECT_TRUE(rep.pass);
    EXPECT_GT(rep.nodes_checked, verify_barrier(subsolution_barrier(spec), spec, 1.0 / 64).nodes_checked);
}

TEST(VerifyBarrier, HigherDimensionUsesTheExactSpectrum) {
    const Ellipticity ell{1.0, 2.0};
    const auto good = spec_of(1, 5, min_alpha(ell, 3), ell, 1.0, 1.0, 3);
    EXPECT_TRUE(verify_barrier(supersolution_barrier(good), good, 1.0 / 64).pass);
    EXPECT_TRUE(verify_barrier(subsolution_barrier(good), good, 1.0 / 64).pass);
    const auto bad = spec_of(1, 5, 2.0, ell, 1.0, 1.0, 3);
    EXPECT_FALSE(verify_barrier(subsolution_barrier(bad, Admissibility::Unchecked), bad, 1.0 / 64).pass);
}

TEST(BarrierReportFormat, HeaderAndRecord) {
    EXPECT_EQ(barrier_report_header(), "kind,a,b,alpha,lambda,Lambda,n,h,worst_violation,pass");
    const auto spec = spec_of(1, 2, 1);
    const auto rep = verify_barrier(subsolution_barrier(spec), spec, 0.0078125);
    const std::string line = to_csv(rep);
    EXPECT_EQ(line.rfind("sub,1,2,1,1,2,2,0.0078125,", 0), 0u) << line;
    EXPECT_EQ(line.substr(line.size() - 5), ",PASS");
}
