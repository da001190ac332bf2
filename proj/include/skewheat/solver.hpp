#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "skewheat/kernel.hpp"
#include "skewheat/medium.hpp"
#include "skewheat/noise.hpp"
#include "skewheat/parallel.hpp"
#include "skewheat/quadrature.hpp"

namespace skewheat {

/// Multiplicative noise coefficient sigma(u) with a Lipschitz constant.
struct SigmaSpec {
    std::function<double(double)> evaluate;
    double lipschitz_bound = 0.0;
    std::string label;
    /// Set when sigma is a constant function.
    std::optional<double> constant;

    double operator()(double u) const { return evaluate(u); }

    static SigmaSpec one() { return constant_value(1.0, "one"); }

    static SigmaSpec constant_value(double c, std::string label = {}) {
        if (label.empty()) {
            std::ostringstream os;
            os.precision(17);
            os << "const:" << c;
            label = os.str();
        }
        return {[c](double) { return c; }, 0.0, std::move(label), c};
    }

    /// h1 u + h2
    static SigmaSpec affine(double h1, double h2) {
        std::ostringstream os;
        os.precision(17);
        os << "affine:" << h1 << "," << h2;
        SigmaSpec s{[h1, h2](double u) { return h1 * u + h2; }, std::abs(h1), os.str(), std::nullopt};
        if (h1 == 0.0) s.constant = h2;
        return s;
    }

    /// c0 + c1 sin(u)
    static SigmaSpec sine(double c0, double c1) {
        std::ostringstream os;
        os.precision(17);
        os << "sin1:" << c0 << "," << c1;
        SigmaSpec s{[c0, c1](double u) { return c0 + c1 * std::sin(u); }, std::abs(c1), os.str(), std::nullopt};
        if (c1 == 0.0) s.constant = c0;
        return s;
    }

    bool is_unit() const noexcept { return constant.has_value() && *constant == 1.0; }
};

/// Values of u at one observation point on the time grid t_i = i T / n.
struct SolutionPath {
    double x = 0.0;         ///< nominal observation point (drives tau and A)
    double location = 0.0;  ///< where the values were computed (cell centre)
    double T = 1.0;
    std::vector<double> values;  ///< n + 1 entries, values[0] = 0

    std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// u(s_i, y_l) on the full grid; row 0 is the zero initial condition.
struct SolutionField {
    RowMatrix values;  ///< (n + 1) x m
    GridSpec grid;
    MediumParams medium;
    std::string sigma_label;
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;

    /// Path at the cell centre nearest to x (ties to the left).
    SolutionPath path(double x) const {
        const std::size_t l = grid.snap(x);
        SolutionPath p;
        p.x = x;
        p.location = grid.center(l);
        p.T = grid.T;
        p.values.resize(grid.n + 1);
        for (std::size_t i = 0; i <= grid.n; ++i) p.values[i] = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
        return p;
    }

    /// Keeps every `stride`-th time row; used to compute statistics on a
    /// coarser grid than the one the noise was simulated on.
    SolutionPath path(double x, std::size_t stride) const {
        SolutionPath full = path(x);
        if (stride <= 1) return full;
        if (grid.n % stride != 0) throw std::invalid_argument("stride must divide the number of time steps");
        SolutionPath coarse = full;
        coarse.values.clear();
        for (std::size_t i = 0; i <= grid.n; i += stride) coarse.values.push_back(full.values[i]);
        return coarse;
    }
};

/// Time argument used for the kernel of the time cell `d` steps before the
/// evaluation row.
enum class KernelLag {
    /// (d - 1/2) delta
    midpoint,
    /// delta (sqrt d + sqrt(d - 1))^2 / 4: the lag whose t^{-1/2} equals the
    /// cell average of t^{-1/2}, so that each cell contributes the exact
    /// variance of the continuous stochastic integral away from the interface.
    variance_matched,
};

struct SolverOptions {
    KernelLag lag = KernelLag::variance_matched;
    /// Kernel matrices for all lags are cached when they fit in this budget.
    std::size_t memory_budget_bytes = std::size_t{2} << 30;
};

inline double kernel_lag(KernelLag rule, std::size_t d, double delta) {
    const double dd = static_cast<double>(d);
    switch (rule) {
        case KernelLag::midpoint:
            return (dd - 0.5) * delta;
        case KernelLag::variance_matched: {
            const double s = std::sqrt(dd) + std::sqrt(dd - 1.0);
            return delta * s * s / 4.0;
        }
    }
    throw std::logic_error("unknown kernel lag rule");
}

/// Explicit discretisation of the mild solution
///   u(s_i, y_j) = sum_{k < i} sum_l G(lag_{i-k}, y_j, y_l) sigma(u(s_k, y_l)) dW_{k,l}.
/// sigma is evaluated at the left end of each time cell, so row i depends on
/// noise rows 0..i-1 only. The kernel matrices depend on the medium and grid
/// alone and are shared by every replicate.
class ConvolutionSolver {
public:
    ConvolutionSolver(const Medium& medium, const GridSpec& grid, SolverOptions options = {})
        : kernel_(medium), grid_(grid), options_(options) {
        const double bytes = static_cast<double>(grid.n) * static_cast<double>(grid.m) *
                             static_cast<double>(grid.m) * sizeof(double);
        if (bytes <= static_cast<double>(options_.memory_budget_bytes)) {
            cache_.reserve(grid.n);
            for (std::size_t d = 1; d <= grid.n; ++d) cache_.push_back(build_kernel_matrix(d));
        }
    }

    const GridSpec& grid() const noexcept { return grid_; }
    const GreenKernel& kernel() const noexcept { return kernel_; }
    bool cached() const noexcept { return !cache_.empty(); }

    double lag(std::size_t d) const { return kernel_lag(options_.lag, d, grid_.delta()); }

    /// K_d[j, l] = G(lag_d, y_j, y_l)
    RowMatrix build_kernel_matrix(std::size_t d) const {
        const auto m = static_cast<Eigen::Index>(grid_.m);
        RowMatrix k(m, m);
        const double t = lag(d);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double x = grid_.center(static_cast<std::size_t>(j));
            for (Eigen::Index l = 0; l < m; ++l) k(j, l) = kernel_(t, x, grid_.center(static_cast<std::size_t>(l)));
        }
        return k;
    }

    SolutionField solve(const SigmaSpec& sigma, const NoiseField& noise) const {
        const auto n = static_cast<Eigen::Index>(grid_.n);
        const auto m = static_cast<Eigen::Index>(grid_.m);
        if (noise.increments.rows() != n || noise.increments.cols() != m) {
            throw std::invalid_argument("solve_field: noise dimensions do not match the grid");
        }
        SolutionField field;
        field.grid = grid_;
        field.medium = kernel_.medium().params();
        field.sigma_label = sigma.label;
        field.seed = noise.seed;
        field.replicate = noise.replicate;
        field.values = RowMatrix::Zero(n + 1, m);

        // weighted(k, l) = sigma(u(s_k, y_l)) dW_{k,l}
        RowMatrix weighted(n, m);
        Eigen::VectorXd acc(m);
        RowMatrix scratch;
        for (Eigen::Index i = 1; i <= n; ++i) {
            for (Eigen::Index l = 0; l < m; ++l) {
                weighted(i - 1, l) = sigma(field.values(i - 1, l)) * noise.increments(i - 1, l);
            }
            acc.setZero();
            for (Eigen::Index k = 0; k < i; ++k) {
                const auto d = static_cast<std::size_t>(i - k);
                if (cached()) {
                    acc.noalias() += cache_[d - 1] * weighted.row(k).transpose();
                } else {
                    scratch = build_kernel_matrix(d);
                    acc.noalias() += scratch * weighted.row(k).transpose();
                }
            }
            for (Eigen::Index j = 0; j < m; ++j) {
                if (!std::isfinite(acc(j))) {
                    std::ostringstream os;
                    os << "solve_field: non-finite value at time row " << i << ", cell " << j;
                    throw std::runtime_error(os.str());
                }
            }
            field.values.row(i) = acc.transpose();
        }
        return field;
    }

private:
    GreenKernel kernel_;
    GridSpec grid_;
    SolverOptions options_;
    std::vector<RowMatrix> cache_;
};

inline SolutionField solve_field(const Medium& medium, const GridSpec& grid, const SigmaSpec& sigma,
                                 const NoiseField& noise, SolverOptions options = {}) {
    return ConvolutionSolver(medium, grid, options).solve(sigma, noise);
}

/// E[u(t, x) u(s, x)] for sigma = 1: the time integral over [0, min(t, s)] of
/// cross_integral(t - r, s - r, x). The substitution r = min(t, s)(1 - v^2)
/// removes the inverse square-root singularity at r = min(t, s).
inline double covariance_linear(double t, double s, double x, const GreenKernel& kernel,
                                double tolerance = 1e-9) {
    if (t < 0.0 || s < 0.0) throw std::domain_error("covariance_linear: times must be non-negative");
    const double lo = std::min(t, s);
    if (lo == 0.0) return 0.0;
    const double u = kernel.medium().natural_coordinate(x);
    const double gap_t = t - lo;
    const double gap_s = s - lo;
    auto integrand = [&](double v) {
        const double w = lo * v * v;
        return 2.0 * lo * v * kernel.cross_integral_natural(gap_t + w, gap_s + w, u);
    };
    return quadrature::integrate(integrand, 0.0, 1.0, {tolerance, 1e-12, 4000}).value;
}

/// Exact Gaussian sampler for u(t_i, x), i = 0..n, when sigma = 1. The
/// covariance of (u(t_1), ..., u(t_n)) is built from covariance_linear and
/// Cholesky-factorised once; each replicate is L z with z from the
/// (seed, replicate) normal stream.
class LinearPathSampler {
public:
    LinearPathSampler(const Medium& medium, double x, double T, std::size_t n, std::size_t workers = 1)
        : x_(x), T_(T), n_(n) {
        if (n < 1) throw std::invalid_argument("LinearPathSampler: n must be at least 1");
        if (!(T > 0.0)) throw std::invalid_argument("LinearPathSampler: T must be positive");
        const GreenKernel kernel(medium);
        const auto size = static_cast<Eigen::Index>(n);
        covariance_ = Eigen::MatrixXd::Zero(size, size);
        auto time = [&](std::size_t i) { return i == n ? T : static_cast<double>(i) * T / static_cast<double>(n); };
        parallel_for(n, workers, [&](std::size_t row) {
            const auto i = static_cast<Eigen::Index>(row);
            for (Eigen::Index j = 0; j <= i; ++j) {
                covariance_(i, j) = covariance_linear(time(row + 1), time(static_cast<std::size_t>(j) + 1), x, kernel);
            }
        });
        covariance_.triangularView<Eigen::StrictlyUpper>() = covariance_.transpose().triangularView<Eigen::StrictlyUpper>();

        Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
        if (llt.info() != Eigen::Success) {
            regularization_ = 1e-12 * covariance_.diagonal().maxCoeff();
            Eigen::MatrixXd shifted = covariance_;
            shifted.diagonal().array() += regularization_;
            llt.compute(shifted);
            if (llt.info() != Eigen::Success) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance_, Eigen::EigenvaluesOnly);
                std::ostringstream os;
                os << "covariance factorisation failed; smallest eigenvalue estimate "
                   << eig.eigenvalues().minCoeff();
                throw std::runtime_error(os.str());
            }
        }
        factor_ = llt.matrixL();
    }

    /// Covariance of u(t_1..t_n, x); the all-zero row and column of t_0 are implicit.
    const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
    double regularization() const noexcept { return regularization_; }

    SolutionPath sample(std::uint64_t seed, std::uint64_t replicate) const {
        const auto size = static_cast<Eigen::Index>(n_);
        Eigen::VectorXd z(size);
        for (Eigen::Index i = 0; i < size; ++i) z(i) = rng::standard_normal(seed, replicate, static_cast<std::uint64_t>(i));
        const Eigen::VectorXd u = factor_.triangularView<Eigen::Lower>() * z;
        SolutionPath p;
        p.x = x_;
        p.location = x_;
        p.T = T_;
        p.values.assign(n_ + 1, 0.0);
        for (Eigen::Index i = 0; i < size; ++i) p.values[static_cast<std::size_t>(i) + 1] = u(i);
        return p;
    }

private:
    double x_;
    double T_;
    std::size_t n_;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd factor_;
    double regularization_ = 0.0;
};

inline std::vector<SolutionPath> solve_linear_exact(const Medium& medium, double x, double T, std::size_t n,
                                                    std::uint64_t seed, std::size_t replicates,
                                                    std::size_t workers = 1) {
    const LinearPathSampler sampler(medium, x, T, n, workers);
    std::vector<SolutionPath> paths(replicates);
    parallel_for(replicates, workers, [&](std::size_t r) { paths[r] = sampler.sample(seed, r); });
    return paths;
}

}  // namespace skewheat
