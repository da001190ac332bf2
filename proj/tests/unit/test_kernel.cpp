#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "skewheat/kernel.hpp"
#include "skewheat/kernel_checks.hpp"

using skewheat::GreenKernel;
using skewheat::Medium;
using skewheat::MediumParams;

namespace {

const MediumParams contrast{1, 4, 1, 1};

// Independent oracle: Boost's adaptive Gauss-Kronrod over the same
// breakpoints, semi-infinite tails included.
template <class F>
double boost_integral(F f, std::vector<double> pts) {
    using boost::math::quadrature::gauss_kronrod;
    double total = gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(), pts.front(), 15, 1e-13);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        total += gauss_kronrod<double, 61>::integrate(f, pts[i], pts[i + 1], 15, 1e-13);
    }
    total += gauss_kronrod<double, 61>::integrate(f, pts.back(), std::numeric_limits<double>::infinity(), 15, 1e-13);
    return total;
}

}  // namespace

// Reference values computed with 30-digit arithmetic from the closed form.
TEST(GreenKernel, FrozenHighPrecisionValues) {
    const GreenKernel g(contrast);
    EXPECT_NEAR(g(0.5, 0.5, -0.5), 0.21431035639840244302, 1e-15);
    EXPECT_NEAR(g(0.5, 0.5, 0.0), 0.3533380431253714145, 1e-15);
    EXPECT_NEAR(g(1.0, -1.0, 2.0), 0.0359939776754587013, 1e-15);
}

TEST(GreenKernel, ReducesToClassicalKernel) {
    for (double a : {0.25, 1.0, 3.0}) {
        const auto r = skewheat::checks::reduction_check(a, 20);
        EXPECT_TRUE(r.passed) << "a = " << a << " worst " << r.value;
    }
}

TEST(GreenKernel, HomogeneousExample) {
    const GreenKernel g(MediumParams{1, 1, 1, 1});
    EXPECT_NEAR(g(1.0, 0.0, 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
}

TEST(GreenKernel, PositiveOnRandomDraws) {
    const GreenKernel g(MediumParams{0.3, 5, 2, 0.4});
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto s = skewheat::checks::kernel_sample(99, i);
        const double d = g.medium().natural_coordinate(s.x) - g.medium().natural_coordinate(s.y);
        if (d * d / (2.0 * s.t) < 600.0) EXPECT_GT(g(s.t, s.x, s.y), 0.0);
        else EXPECT_GE(g(s.t, s.x, s.y), 0.0);  // underflow
    }
}

TEST(GreenKernel, ContinuousInFirstArgumentAcrossInterface) {
    const GreenKernel g(contrast);
    for (double y : {-1.0, 0.0, 0.7}) {
        EXPECT_NEAR(g(0.4, -1e-12, y), g(0.4, 1e-12, y), 1e-8);
    }
}

TEST(GreenKernel, RejectsNonPositiveTime) {
    const GreenKernel g(contrast);
    EXPECT_THROW(g(0.0, 0.1, 0.2), std::domain_error);
    EXPECT_THROW(g(-1.0, 0.1, 0.2), std::domain_error);
    EXPECT_THROW(g.l1_norm(0.0, 0.1), std::domain_error);
    EXPECT_THROW(g.cross_integral(1.0, 0.0, 0.1), std::domain_error);
}

TEST(GreenKernel, MassIsOne) {
    const GreenKernel g(MediumParams{0.5, 3, 1.5, 0.2});
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto s = skewheat::checks::kernel_sample(5, i);
        EXPECT_NEAR(g.l1_norm(s.t, s.x), 1.0, 1e-14);
    }
}

TEST(GreenKernel, ClosedFormsAgreeWithIndependentQuadrature) {
    for (const MediumParams& p : {contrast, MediumParams{0.3, 2.5, 3, 0.5}}) {
        const GreenKernel g(p);
        for (std::uint64_t i = 0; i < 12; ++i) {
            const auto s = skewheat::checks::kernel_sample(17, i);
            const auto pts = skewheat::checks::kernel_breakpoints(g.medium(), std::max(s.t, s.t2), s.x);
            const double l1 = boost_integral([&](double y) { return std::abs(g(s.t, s.x, y)); }, pts);
            const double l2 = boost_integral([&](double y) { return g(s.t, s.x, y) * g(s.t, s.x, y); }, pts);
            const double cross = boost_integral([&](double y) { return g(s.t, s.x, y) * g(s.t2, s.x, y); }, pts);
            EXPECT_NEAR(g.l1_norm(s.t, s.x), l1, 1e-10);
            EXPECT_NEAR(g.l2_norm_sq(s.t, s.x), l2, 1e-10);
            EXPECT_NEAR(g.cross_integral(s.t, s.t2, s.x), cross, 1e-10);
        }
    }
}

TEST(GreenKernel, CrossIntegralSymmetricInTimes) {
    const GreenKernel g(contrast);
    EXPECT_NEAR(g.cross_integral(0.3, 0.9, 0.4), g.cross_integral(0.9, 0.3, 0.4), 1e-15);
}

TEST(GreenKernel, HomogeneousL2NormClosedForm) {
    // int phi_{at}(x - y)^2 dy = 1 / (2 sqrt(pi a t))
    const GreenKernel g(MediumParams{2, 2, 1, 1});
    EXPECT_NEAR(g.l2_norm_sq(0.5, 0.3), 1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-14);
}

TEST(GreenKernelBounds, ContrastMediumSatisfiesAllPublishedBounds) {
    const GreenKernel g(contrast);
    for (const auto& c : skewheat::checks::lemma_checks(g, 20240601)) {
        EXPECT_TRUE(c.passed) << c.name << " = " << c.value;
    }
}

// For a homogeneous medium with a = 1 the squared L2 norm is 1 / (2 sqrt(pi t))
// = 0.2821 / sqrt(t), while the published constant gives pi^{-3/2} / sqrt(t)
// = 0.1796 / sqrt(t). Pinned so a silent change to the constant is noticed;
// the re-derived bound must hold.
TEST(GreenKernelBounds, PublishedL2BoundFailsForUnitHomogeneousMedium) {
    const GreenKernel g(MediumParams{1, 1, 1, 1});
    EXPECT_NEAR(g.l2_bound(1.0), 0.17958712212516656, 1e-15);
    EXPECT_FALSE(g.l2_bound_holds(1.0, 0.0));
    EXPECT_LE(g.l2_norm_sq(1.0, 0.0), g.l2_bound_rederived(1.0));
}

TEST(GreenKernelBounds, RederivedL2BoundHoldsOnRandomMedia) {
    for (std::uint64_t k = 0; k < 50; ++k) {
        auto lu = [&](std::uint64_t j) { return 0.25 * std::pow(16.0, skewheat::rng::uniform(7, k, j)); };
        const GreenKernel g(MediumParams{lu(0), lu(1), lu(2), lu(3)});
        for (std::uint64_t i = 0; i < 40; ++i) {
            const auto s = skewheat::checks::kernel_sample(8, i);
            EXPECT_LE(g.l2_norm_sq(s.t, s.x), g.l2_bound_rederived(s.t));
            EXPECT_TRUE(g.pointwise_bound_holds(s.t, s.x, s.y));
            EXPECT_TRUE(g.l1_bound_holds(s.t, s.x));
        }
    }
}

TEST(GreenKernelPde, HomogeneousResidualSmall) {
    const GreenKernel g(MediumParams{1, 1, 1, 1});
    const auto r = g.pde_residual(0.5, 1.0, 0.0, 1e-3);
    EXPECT_LT(r.absolute / std::abs(r.time_derivative), 1e-4);
    EXPECT_LT(r.relative, 1e-4);
}

TEST(GreenKernelPde, ContrastResidualWithinTolerance) {
    const auto r = skewheat::checks::pde_residual_check(GreenKernel(contrast));
    EXPECT_TRUE(r.passed) << r.value;
}

TEST(GreenKernelPde, RejectsPointsTooCloseToBoundary) {
    const GreenKernel g(contrast);
    EXPECT_THROW(g.pde_residual(0.5, 1e-4, 0.0, 1e-3), std::domain_error);
    EXPECT_THROW(g.pde_residual(1e-3, 1.0, 0.0, 1e-3), std::domain_error);
    EXPECT_THROW(g.pde_residual(0.5, 1.0, 0.0, 0.0), std::domain_error);
}

TEST(GreenKernelDiagnostics, FluxTransmittedAcrossInterface) {
    EXPECT_LT(skewheat::checks::flux_transmission_diagnostic(GreenKernel(contrast)).value, 1e-5);
}

TEST(GreenKernelDiagnostics, ComposesAgainstLebesgueMeasure) {
    EXPECT_LT(skewheat::checks::composition_diagnostic(GreenKernel(contrast)).value, 1e-9);
}
