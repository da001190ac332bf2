#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "skewheat/quadrature.hpp"

namespace q = skewheat::quadrature;

TEST(Quadrature, PolynomialOfDegreeTwentyNine) {
    // One 15-point Kronrod panel is exact to degree 22; adaptivity covers the rest.
    auto f = [](double x) { return std::pow(x, 29) + 3.0 * x * x; };
    const auto r = q::integrate(f, 0.0, 1.0);
    EXPECT_NEAR(r.value, 1.0 / 30.0 + 1.0, 1e-13);
}

TEST(Quadrature, GaussianMass) {
    auto f = [](double x) { return std::exp(-x * x / 2) / std::sqrt(2 * std::numbers::pi); };
    EXPECT_NEAR(q::integrate(f, -12.0, 12.0).value, 1.0, 1e-13);
}

TEST(Quadrature, InverseSquareRootEndpointSingularity) {
    auto f = [](double x) { return 1.0 / std::sqrt(x); };
    const auto r = q::integrate(f, 0.0, 1.0, {1e-9, 1e-10, 4000});
    EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(Quadrature, KinkHandledByBreakpoints) {
    auto f = [](double x) { return std::abs(x - 0.3); };
    const auto r = q::integrate_pieces(f, {-1.0, 0.3, 1.0});
    EXPECT_NEAR(r.value, 0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7, 1e-14);
}

TEST(Quadrature, DegenerateAndInvalidIntervals) {
    auto f = [](double) { return 1.0; };
    EXPECT_EQ(q::integrate(f, 2.0, 2.0).value, 0.0);
    EXPECT_THROW(q::integrate(f, 1.0, 0.0), std::invalid_argument);
}
