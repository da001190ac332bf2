#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "skewheat/kernel.hpp"
#include "skewheat/noise.hpp"
#include "skewheat/quadrature.hpp"

// Numerical checks of the kernel against direct quadrature and its published
// bounds. Drives the kernel-selftest command.

namespace skewheat::checks {

/// Breakpoints for integrating functions of G(t, x, .) over y: the interface,
/// the source point, its mirror image across the interface and a cut-off
/// 12 standard deviations out in the natural coordinate on each side.
inline std::vector<double> kernel_breakpoints(const Medium& medium, double t_max, double x) {
    const double u = medium.natural_coordinate(x);
    const double reach = std::abs(u) + 12.0 * std::sqrt(t_max);
    std::vector<double> pts = {-medium.sqrt_a1() * reach, 0.0, medium.sqrt_a2() * reach};
    if (x != 0.0) {
        pts.push_back(x);
        // mirror: same |natural coordinate| on the other side
        pts.push_back(x < 0.0 ? medium.sqrt_a2() * std::abs(u) : -medium.sqrt_a1() * std::abs(u));
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

inline quadrature::Tolerance oracle_tolerance() { return {1e-13, 1e-13, 20000}; }

inline double l1_norm_by_quadrature(const GreenKernel& g, double t, double x) {
    auto f = [&](double y) { return std::abs(g(t, x, y)); };
    return quadrature::integrate_pieces(f, kernel_breakpoints(g.medium(), t, x), oracle_tolerance()).value;
}

inline double cross_integral_by_quadrature(const GreenKernel& g, double t1, double t2, double x) {
    auto f = [&](double y) { return g(t1, x, y) * g(t2, x, y); };
    return quadrature::integrate_pieces(f, kernel_breakpoints(g.medium(), std::max(t1, t2), x), oracle_tolerance())
        .value;
}

struct CheckResult {
    std::string name;
    double value = 0.0;      ///< worst error, or violation count
    double threshold = 0.0;  ///< pass iff value <= threshold
    bool passed = false;
    bool diagnostic = false;  ///< recorded only; does not affect pass/fail
    std::size_t cases = 0;
};

/// Homogeneous medium (a1 = a2 = a, rho1 = rho2) against the classical heat
/// kernel on a 50^3 grid of t in [0.01, 1] and x, y in [-3, 3].
inline CheckResult reduction_check(double a, std::size_t points = 50) {
    const GreenKernel g(MediumParams{a, a, 1.0, 1.0});
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t it = 0; it < points; ++it) {
        const double t = 0.01 + 0.99 * static_cast<double>(it) / static_cast<double>(points - 1);
        for (std::size_t ix = 0; ix < points; ++ix) {
            const double x = -3.0 + 6.0 * static_cast<double>(ix) / static_cast<double>(points - 1);
            for (std::size_t iy = 0; iy < points; ++iy) {
                const double y = -3.0 + 6.0 * static_cast<double>(iy) / static_cast<double>(points - 1);
                const double ref = homogeneous_heat_kernel(t, x, y, a);
                worst = std::max(worst, std::abs(g(t, x, y) - ref) / ref);
                ++cases;
            }
        }
    }
    return {"reduction_max_rel_error", worst, 1e-12, worst <= 1e-12, false, cases};
}

/// Random draws shared by the sweeps: t log-uniform on [0.01, 2], x and y
/// uniform on [-3, 3].
struct KernelSample {
    double t, t2, x, y;
};

inline KernelSample kernel_sample(std::uint64_t seed, std::uint64_t i) {
    auto u = [&](std::uint64_t k) { return rng::uniform(seed, i, k); };
    auto log_uniform = [](double v) { return 0.01 * std::pow(200.0, v); };
    return {log_uniform(u(0)), log_uniform(u(1)), -3.0 + 6.0 * u(2), -3.0 + 6.0 * u(3)};
}

/// l1_norm, l2_norm_sq and cross_integral against quadrature of G.
inline CheckResult closed_form_check(const GreenKernel& g, std::uint64_t seed, std::size_t cases = 20,
                                     double tolerance = 1e-8) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
        const auto s = kernel_sample(seed, i);
        worst = std::max(worst, std::abs(g.l1_norm(s.t, s.x) - l1_norm_by_quadrature(g, s.t, s.x)));
        worst = std::max(worst, std::abs(g.l2_norm_sq(s.t, s.x) - cross_integral_by_quadrature(g, s.t, s.t, s.x)));
        worst = std::max(worst,
                         std::abs(g.cross_integral(s.t, s.t2, s.x) - cross_integral_by_quadrature(g, s.t, s.t2, s.x)));
    }
    return {"closed_form_max_abs_error", worst, tolerance, worst <= tolerance, false, cases};
}

/// Violation counts of the pointwise, L1 and L2 bounds over random (t, x, y).
inline std::vector<CheckResult> lemma_checks(const GreenKernel& g, std::uint64_t seed, std::size_t cases = 1000) {
    std::size_t pointwise = 0, l1 = 0, l2 = 0, l2_rederived = 0;
    for (std::size_t i = 0; i < cases; ++i) {
        const auto s = kernel_sample(seed, 1'000'000 + i);
        if (!g.pointwise_bound_holds(s.t, s.x, s.y)) ++pointwise;
        if (!g.l1_bound_holds(s.t, s.x)) ++l1;
        if (!g.l2_bound_holds(s.t, s.x)) ++l2;
        if (!(g.l2_norm_sq(s.t, s.x) <= g.l2_bound_rederived(s.t))) ++l2_rederived;
    }
    auto mk = [&](const char* name, std::size_t v, bool diagnostic) {
        return CheckResult{name, static_cast<double>(v), 0.0, v == 0, diagnostic, cases};
    };
    return {mk("pointwise_bound_violations", pointwise, false), mk("l1_bound_violations", l1, false),
            mk("l2_bound_violations", l2, false), mk("l2_rederived_bound_violations", l2_rederived, true)};
}

/// Largest relative finite-difference residual over t in [0.25, 1],
/// |x| in [0.25, 2], y in {-1, -0.5, 0, 0.5, 1}.
inline CheckResult pde_residual_check(const GreenKernel& g, double h = 1e-3, double tolerance = 1e-3) {
    double worst = 0.0;
    std::size_t cases = 0;
    const double ys[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (int it = 0; it <= 15; ++it) {
        const double t = 0.25 + 0.05 * it;
        for (int ix = 0; ix <= 14; ++ix) {
            const double ax = 0.25 + 0.125 * ix;
            for (double x : {-ax, ax}) {
                for (double y : ys) {
                    worst = std::max(worst, g.pde_residual(t, x, y, h).relative);
                    ++cases;
                }
            }
        }
    }
    return {"pde_max_rel_residual", worst, tolerance, worst <= tolerance, false, cases};
}

/// rho1 a1 dG/dx(0-) against rho2 a2 dG/dx(0+) in the first argument,
/// one-sided differences. Recorded only.
inline CheckResult flux_transmission_diagnostic(const GreenKernel& g, double h = 1e-7) {
    const auto& p = g.medium().params();
    double worst = 0.0;
    std::size_t cases = 0;
    for (double t : {0.25, 0.5, 1.0}) {
        for (double y : {-1.0, -0.3, 0.4, 1.2}) {
            const double g0 = g(t, 0.0, y);
            const double left = p.rho1 * p.a1 * (g0 - g(t, -h, y)) / h;
            const double right = p.rho2 * p.a2 * (g(t, h, y) - g0) / h;
            worst = std::max(worst, std::abs(left - right) / std::max(std::abs(left), std::abs(right)));
            ++cases;
        }
    }
    return {"flux_transmission_rel_mismatch", worst, 0.0, true, true, cases};
}

/// Chapman-Kolmogorov composition with Lebesgue measure:
/// int G(t, x, z) G(s, z, y) dz against G(t + s, x, y). Recorded only.
inline CheckResult composition_diagnostic(const GreenKernel& g) {
    double worst = 0.0;
    std::size_t cases = 0;
    for (double t : {0.2, 0.5}) {
        for (double s : {0.3, 0.7}) {
            for (double x : {-0.8, 0.6}) {
                for (double y : {-0.5, 0.9}) {
                    auto f = [&](double z) { return g(t, x, z) * g(s, z, y); };
                    auto pts = kernel_breakpoints(g.medium(), t + s, x);
                    const auto more = kernel_breakpoints(g.medium(), t + s, y);
                    pts.insert(pts.end(), more.begin(), more.end());
                    std::sort(pts.begin(), pts.end());
                    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
                    const double lhs = quadrature::integrate_pieces(f, pts, oracle_tolerance()).value;
                    const double rhs = g(t + s, x, y);
                    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
                    ++cases;
                }
            }
        }
    }
    return {"composition_lebesgue_rel_mismatch", worst, 0.0, true, true, cases};
}

inline std::vector<CheckResult> kernel_selftest(const MediumParams& params, std::uint64_t seed) {
    const GreenKernel g(params);
    std::vector<CheckResult> out;
    out.push_back(reduction_check(params.a1));
    out.push_back(closed_form_check(g, seed));
    for (auto& c : lemma_checks(g, seed)) out.push_back(c);
    out.push_back(pde_residual_check(g));
    out.push_back(flux_transmission_diagnostic(g));
    out.push_back(composition_diagnostic(g));
    return out;
}

}  // namespace skewheat::checks
