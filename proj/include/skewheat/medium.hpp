#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace skewheat {

/// Material constants of the two-layer medium. Index 1 is the half-line
/// x <= 0, index 2 is x > 0.
struct MediumParams {
    double a1 = 1.0;    ///< diffusivity, left
    double a2 = 1.0;    ///< diffusivity, right
    double rho1 = 1.0;  ///< density weight, left
    double rho2 = 1.0;  ///< density weight, right

    void validate() const {
        auto check = [](double v, const char* name) {
            if (!(std::isfinite(v) && v > 0.0)) {
                throw std::invalid_argument(std::string("medium parameter ") + name +
                                            " must be finite and strictly positive");
            }
        };
        check(a1, "a1");
        check(a2, "a2");
        check(rho1, "rho1");
        check(rho2, "rho2");
    }

    friend bool operator==(const MediumParams&, const MediumParams&) = default;
};

/// Interface constants shared by the kernel and the variation limit.
struct DerivedConstants {
    double alpha = 0.0;  ///< 1 - rho1 a1 / (rho2 a2)
    double beta = 0.0;   ///< skewness of the reflected term, |beta| < 1
    double eta = 1.0;    ///< interface factor; tau(0) = eta^2
};

inline DerivedConstants derive_constants(const MediumParams& p) {
    p.validate();
    DerivedConstants d;
    d.alpha = 1.0 - (p.rho1 * p.a1) / (p.rho2 * p.a2);
    const double s1 = std::sqrt(p.a1);
    const double s2 = std::sqrt(p.a2);
    d.beta = (s1 + s2 * (d.alpha - 1.0)) / (s1 - s2 * (d.alpha - 1.0));
    d.eta = 0.5 * ((1.0 - d.beta) * (1.0 - d.beta) +
                   std::sqrt(p.a1 / p.a2) * (1.0 + d.beta) * (1.0 + d.beta));
    return d;
}

/// Validated medium with its derived constants. All piecewise quantities use
/// the closed left branch at x = 0.
class Medium {
public:
    explicit Medium(const MediumParams& p) : params_(p), derived_(derive_constants(p)) {
        sqrt_a1_ = std::sqrt(p.a1);
        sqrt_a2_ = std::sqrt(p.a2);
    }

    const MediumParams& params() const noexcept { return params_; }
    const DerivedConstants& derived() const noexcept { return derived_; }

    double diffusivity(double x) const noexcept { return x <= 0.0 ? params_.a1 : params_.a2; }
    double density(double x) const noexcept { return x <= 0.0 ? params_.rho1 : params_.rho2; }

    /// Piecewise-linear map that turns the medium into unit diffusivity:
    /// y / sqrt(a1) for y <= 0 and y / sqrt(a2) for y > 0.
    double natural_coordinate(double y) const noexcept {
        return y <= 0.0 ? y / sqrt_a1_ : y / sqrt_a2_;
    }

    /// Correction factor of the quartic-variation limit: eta^2 at the
    /// interface, one elsewhere.
    double tau(double x) const noexcept { return x == 0.0 ? derived_.eta * derived_.eta : 1.0; }

    double sqrt_a1() const noexcept { return sqrt_a1_; }
    double sqrt_a2() const noexcept { return sqrt_a2_; }

private:
    MediumParams params_;
    DerivedConstants derived_;
    double sqrt_a1_ = 1.0;
    double sqrt_a2_ = 1.0;
};

}  // namespace skewheat
