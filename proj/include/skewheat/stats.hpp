#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "skewheat/medium.hpp"
#include "skewheat/parallel.hpp"
#include "skewheat/solver.hpp"

namespace skewheat {

/// Sum of fourth powers of consecutive increments.
inline double quartic_variation(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("quartic_variation: path needs at least two points");
    double v = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double d = values[i] - values[i - 1];
        const double d2 = d * d;
        v += d2 * d2;
    }
    return v;
}

inline double quartic_variation(const SolutionPath& path) { return quartic_variation(std::span<const double>(path.values)); }

/// 6 tau(x) / (pi A(x)); the limit of V_{n,x} per unit of int sigma^4 dr.
inline double quartic_limit_constant(const Medium& medium, double x) {
    return 6.0 * medium.tau(x) / (std::numbers::pi * medium.diffusivity(x));
}

/// Limit of V_{n,x} when sigma = 1.
inline double quartic_limit_unit_sigma(const Medium& medium, double x, double T) {
    return quartic_limit_constant(medium, x) * T;
}

/// Leading term of E[Delta^2] at lag delta: sqrt(delta) sqrt(2 tau / (pi A)).
inline double expected_increment_sq(const Medium& medium, double x, double delta) {
    return std::sqrt(delta) * std::sqrt(2.0 * medium.tau(x) / (std::numbers::pi * medium.diffusivity(x)));
}

/// E[Delta^4] = 6 delta tau / (A pi).
inline double expected_increment_fourth(const Medium& medium, double x, double delta) {
    return quartic_limit_constant(medium, x) * delta;
}

/// (6 tau / (pi A)) delta sum_{i=1}^{n} sigma(u(t_{i-1}))^4: left-endpoint
/// Riemann sum of the integral of sigma^4 along the path.
inline double limit_functional(const SolutionPath& path, const SigmaSpec& sigma, const Medium& medium) {
    const std::size_t n = path.steps();
    if (n < 1) throw std::invalid_argument("limit_functional: path needs at least two points");
    const double delta = path.T / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double s = sigma(path.values[i - 1]);
        sum += (s * s) * (s * s);
    }
    return quartic_limit_constant(medium, path.x) * delta * sum;
}

/// A_n(x) = 6 T tau(x) sum_{i=1}^{n} sigma(u(t_i))^4 / (n pi V_{n,x}).
inline double estimate_diffusivity(const SolutionPath& path, const SigmaSpec& sigma, const Medium& medium) {
    const double v = quartic_variation(path);
    if (!(v > 0.0)) throw std::domain_error("estimate_diffusivity: degenerate path with zero quartic variation");
    const std::size_t n = path.steps();
    double sum = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double s = sigma(path.values[i]);
        sum += (s * s) * (s * s);
    }
    return 6.0 * path.T * medium.tau(path.x) * sum / (static_cast<double>(n) * std::numbers::pi * v);
}

struct MomentSummary {
    double mean_sq = 0.0;      ///< E Delta^2
    double mean_fourth = 0.0;  ///< E Delta^4
    double mean_sixth = 0.0;   ///< E Delta^6
    double kurtosis_ratio = 0.0;  ///< E Delta^4 / (E Delta^2)^2, 3 for Gaussians
    double sixth_ratio = 0.0;     ///< E Delta^6 / (E Delta^2)^3, 15 for Gaussians
    std::size_t count = 0;
};

/// First increment index treated as interior: increments starting at t_i
/// with i >= n / 4. Early increments have a different second-moment constant.
inline std::size_t first_interior_increment(std::size_t n) { return n / 4; }

/// Empirical increment moments pooled over paths and interior increments.
inline MomentSummary moment_summary(std::span<const SolutionPath> paths) {
    std::vector<double> d2, d4, d6;
    for (const auto& p : paths) {
        const std::size_t n = p.steps();
        for (std::size_t i = first_interior_increment(n); i < n; ++i) {
            const double d = p.values[i + 1] - p.values[i];
            const double s = d * d;
            d2.push_back(s);
            d4.push_back(s * s);
            d6.push_back(s * s * s);
        }
    }
    MomentSummary out;
    out.count = d2.size();
    if (out.count == 0) return out;
    const double c = static_cast<double>(out.count);
    out.mean_sq = pairwise_sum(d2) / c;
    out.mean_fourth = pairwise_sum(d4) / c;
    out.mean_sixth = pairwise_sum(d6) / c;
    if (out.mean_sq > 0.0) {
        out.kurtosis_ratio = out.mean_fourth / (out.mean_sq * out.mean_sq);
        out.sixth_ratio = out.mean_sixth / (out.mean_sq * out.mean_sq * out.mean_sq);
    }
    return out;
}

/// E|u(t + q delta) - u(t)|^2 / sqrt(q delta) pooled over paths and interior
/// t >= T/4, one value per stride q. Bounded above and below for a
/// quasi-helix.
inline std::vector<double> second_moment_scaling(std::span<const SolutionPath> paths,
                                                 std::span<const std::size_t> strides) {
    std::vector<double> out;
    for (const std::size_t q : strides) {
        if (q == 0) throw std::invalid_argument("second_moment_scaling: stride must be positive");
        std::vector<double> sq;
        double lag = 0.0;
        for (const auto& p : paths) {
            const std::size_t n = p.steps();
            lag = static_cast<double>(q) * p.T / static_cast<double>(n);
            for (std::size_t i = first_interior_increment(n); i + q <= n; ++i) {
                const double d = p.values[i + q] - p.values[i];
                sq.push_back(d * d);
            }
        }
        out.push_back(sq.empty() ? 0.0 : pairwise_sum(sq) / static_cast<double>(sq.size()) / std::sqrt(lag));
    }
    return out;
}

/// Per-path statistics.
struct VariationReport {
    double v_quartic = 0.0;
    double limit_value = 0.0;
    /// NaN when the path is degenerate (zero quartic variation).
    double estimator_A = std::numeric_limits<double>::quiet_NaN();
    MomentSummary moments;
    std::size_t n = 0;
    double x = 0.0;
    double T = 0.0;
    std::uint64_t replicate = 0;
};

inline VariationReport make_report(const SolutionPath& path, const SigmaSpec& sigma, const Medium& medium,
                                   std::uint64_t replicate = 0) {
    VariationReport r;
    r.v_quartic = quartic_variation(path);
    r.limit_value = limit_functional(path, sigma, medium);
    if (r.v_quartic > 0.0) r.estimator_A = estimate_diffusivity(path, sigma, medium);
    r.moments = moment_summary(std::span<const SolutionPath>(&path, 1));
    r.n = path.steps();
    r.x = path.x;
    r.T = path.T;
    r.replicate = replicate;
    return r;
}

/// Average of V_{n, x_j} over x_j = j / m, j = 0..m-1.
struct AveragedReport {
    double v_nm = 0.0;
    std::vector<double> points;
    std::vector<VariationReport> per_point;
};

/// Observation points are snapped to cell centres; x_0 = 0 keeps its nominal
/// value so that tau(0) = eta^2 and A(0) = a1 are used for it. `stride`
/// subsamples the time rows (see SolutionField::path).
inline AveragedReport averaged_variation(const SolutionField& field, const SigmaSpec& sigma, std::size_t m,
                                         std::size_t stride = 1) {
    if (m < 1) throw std::invalid_argument("averaged_variation: m must be at least 1");
    if (!(field.grid.L >= 1.0)) throw std::invalid_argument("averaged_variation: grid does not cover [0, 1)");
    const Medium medium(field.medium);
    AveragedReport out;
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(m);
        const auto path = field.path(x, stride);
        out.points.push_back(x);
        out.per_point.push_back(make_report(path, sigma, medium, field.replicate));
        sum += out.per_point.back().v_quartic;
    }
    out.v_nm = sum / static_cast<double>(m);
    return out;
}

/// Mean, standard error and quartiles of a Monte Carlo sample.
struct SampleSummary {
    double mean = 0.0;
    double std_error = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::size_t count = 0;
};

inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline SampleSummary summarize(std::span<const double> sample) {
    SampleSummary s;
    s.count = sample.size();
    if (s.count == 0) {
        s.mean = s.std_error = s.median = s.q25 = s.q75 = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    const double c = static_cast<double>(s.count);
    s.mean = pairwise_sum(sample) / c;
    if (s.count > 1) {
        std::vector<double> dev(sample.size());
        for (std::size_t i = 0; i < sample.size(); ++i) dev[i] = (sample[i] - s.mean) * (sample[i] - s.mean);
        s.std_error = std::sqrt(pairwise_sum(dev) / (c - 1.0) / c);
    }
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    s.median = quantile_sorted(sorted, 0.5);
    s.q25 = quantile_sorted(sorted, 0.25);
    s.q75 = quantile_sorted(sorted, 0.75);
    return s;
}

}  // namespace skewheat
