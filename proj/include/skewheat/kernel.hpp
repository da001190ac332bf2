#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "skewheat/medium.hpp"

namespace skewheat {

/// Constants of the three kernel bounds (pointwise, L1, L2) as published.
struct BoundConstants {
    double c_pointwise = 0.0;
    double c_l1 = 0.0;
    double c_l2 = 0.0;
};

struct PdeResidual {
    double time_derivative = 0.0;  ///< centred difference of G in t
    double space_term = 0.0;       ///< (A(x)/2) times centred second difference in x
    double absolute = 0.0;         ///< |time_derivative - space_term|
    /// absolute / max(|dG/dt|, G/t); G/t is the natural size of dG/dt and
    /// keeps the ratio finite where dG/dt changes sign.
    double relative = 0.0;
};

/// Gaussian density with variance t.
inline double gaussian_density(double z, double t) noexcept {
    return std::exp(-z * z / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

/// Classical kernel of (a/2) d^2/dx^2.
inline double homogeneous_heat_kernel(double t, double x, double y, double a) noexcept {
    return gaussian_density(x - y, a * t);
}

/// Fundamental solution of du/dt = L u for the two-material operator
/// L = (1 / 2 rho) d/dx (rho A d/dx). G(t, x, y) is not a function of x - y
/// alone; it depends on both points through the natural coordinate and the
/// side of y. sign(0) is taken as -1 so that y = 0 belongs to the left branch.
class GreenKernel {
public:
    explicit GreenKernel(const Medium& medium) : medium_(medium) {}
    explicit GreenKernel(const MediumParams& p) : medium_(p) {}

    const Medium& medium() const noexcept { return medium_; }

    double operator()(double t, double x, double y) const {
        require_positive(t);
        const double u = medium_.natural_coordinate(x);
        const double v = medium_.natural_coordinate(y);
        const bool left = y <= 0.0;
        const double prefactor = left ? 1.0 / medium_.sqrt_a1() : 1.0 / medium_.sqrt_a2();
        const double sign = left ? -1.0 : 1.0;
        const double beta = medium_.derived().beta;
        const double direct = std::exp(-(u - v) * (u - v) / (2.0 * t));
        const double reflected = std::exp(-(std::abs(u) + std::abs(v)) * (std::abs(u) + std::abs(v)) / (2.0 * t));
        return prefactor / std::sqrt(2.0 * std::numbers::pi * t) * (direct + beta * sign * reflected);
    }

    /// Integral over y of |G(t, x, y)|. G is positive for |beta| < 1, so this
    /// is the total mass, assembled from the four half-line Gaussian pieces.
    double l1_norm(double t, double x) const {
        require_positive(t);
        const double u = medium_.natural_coordinate(x);
        const double au = std::abs(u);
        const double beta = medium_.derived().beta;
        const double s = std::sqrt(2.0 * t);
        // In the natural coordinate v, G dy = [phi(v-u) + beta sign(v) phi(|u|+|v|)] dv.
        const double left = 0.5 * std::erfc(u / s) - beta * 0.5 * std::erfc(au / s);
        const double right = 0.5 * std::erfc(-u / s) + beta * 0.5 * std::erfc(au / s);
        return std::abs(left) + std::abs(right);
    }

    double l2_norm_sq(double t, double x) const { return cross_integral(t, t, x); }

    /// Integral over z of G(t1, x, z) G(t2, x, z).
    double cross_integral(double t1, double t2, double x) const {
        require_positive(t1);
        require_positive(t2);
        return cross_integral_natural(t1, t2, medium_.natural_coordinate(x));
    }

    /// Same as cross_integral with the natural coordinate u = f(x) supplied;
    /// used by the covariance quadrature, which keeps x fixed.
    double cross_integral_natural(double t1, double t2, double u) const noexcept {
        const double au = std::abs(u);
        const double beta = medium_.derived().beta;
        const double sum = t1 + t2;
        const double spread = std::sqrt(2.0 * t1 * t2 / sum);
        // Integral over a half-line of phi_t1(v - c1) phi_t2(v - c2):
        // phi_{t1+t2}(c1 - c2) times the mass of N(mean, t1 t2 / (t1 + t2)) on that side.
        auto piece = [&](double c1, double c2, bool left_side) {
            const double mean = (c1 * t2 + c2 * t1) / sum;
            const double mass = 0.5 * std::erfc((left_side ? mean : -mean) / spread);
            return gaussian_density(c1 - c2, sum) * mass;
        };
        const double left = piece(u, u, true) - beta * (piece(u, au, true) + piece(au, u, true)) +
                            beta * beta * piece(au, au, true);
        const double right = piece(u, u, false) + beta * (piece(u, -au, false) + piece(-au, u, false)) +
                             beta * beta * piece(-au, -au, false);
        return left / medium_.sqrt_a1() + right / medium_.sqrt_a2();
    }

    BoundConstants bounds() const noexcept {
        const double b = std::abs(medium_.derived().beta);
        const double inv = 1.0 / medium_.sqrt_a1() + 1.0 / medium_.sqrt_a2();
        const double smax = std::max(medium_.sqrt_a1(), medium_.sqrt_a2());
        BoundConstants c;
        c.c_pointwise = (1.0 + b) / std::sqrt(2.0 * std::numbers::pi) * inv;
        c.c_l1 = inv * (1.0 + b) * smax;
        c.c_l2 = smax * c.c_pointwise;
        return c;
    }

    /// |G| <= c_pointwise t^{-1/2} exp(-(f(x) - f(y))^2 / 2t)
    bool pointwise_bound_holds(double t, double x, double y) const {
        const double u = medium_.natural_coordinate(x);
        const double v = medium_.natural_coordinate(y);
        const double bound = bounds().c_pointwise / std::sqrt(t) * std::exp(-(u - v) * (u - v) / (2.0 * t));
        return std::abs((*this)(t, x, y)) <= bound;
    }

    bool l1_bound_holds(double t, double x) const { return l1_norm(t, x) <= bounds().c_l1; }

    /// The L2 bound exactly as published: c_l2^2 / (2 sqrt(pi) sqrt(t)).
    double l2_bound(double t) const {
        const double c = bounds().c_l2;
        return c * c / (2.0 * std::sqrt(std::numbers::pi) * std::sqrt(t));
    }
    bool l2_bound_holds(double t, double x) const { return l2_norm_sq(t, x) <= l2_bound(t); }

    /// L2 bound re-derived from the pointwise bound without the repeated
    /// 1/sqrt(2 pi) factor: c_pointwise^2 max(sqrt a1, sqrt a2) sqrt(pi / t).
    double l2_bound_rederived(double t) const {
        const double c = bounds().c_pointwise;
        return c * c * std::max(medium_.sqrt_a1(), medium_.sqrt_a2()) * std::sqrt(std::numbers::pi / t);
    }

    /// Finite-difference check that G solves dG/dt = (A(x)/2) d^2G/dx^2 away
    /// from the interface. Requires t > 2h and |x| > 2h.
    PdeResidual pde_residual(double t, double x, double y, double h) const {
        if (!(h > 0.0) || !(t > 2.0 * h) || !(std::abs(x) > 2.0 * h)) {
            throw std::domain_error("pde_residual: need h > 0, t > 2h and |x| > 2h");
        }
        const auto& g = *this;
        const double centre = g(t, x, y);
        PdeResidual r;
        r.time_derivative = (g(t + h, x, y) - g(t - h, x, y)) / (2.0 * h);
        r.space_term = 0.5 * medium_.diffusivity(x) * (g(t, x + h, y) - 2.0 * centre + g(t, x - h, y)) / (h * h);
        r.absolute = std::abs(r.time_derivative - r.space_term);
        r.relative = r.absolute / std::max(std::abs(r.time_derivative), centre / t);
        return r;
    }

private:
    static void require_positive(double t) {
        if (!(t > 0.0)) throw std::domain_error("green kernel: time lag must be strictly positive");
    }

    Medium medium_;
};

}  // namespace skewheat
