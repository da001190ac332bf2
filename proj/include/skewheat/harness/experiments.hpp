#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skewheat/harness/config.hpp"
#include "skewheat/harness/report.hpp"
#include "skewheat/kernel_checks.hpp"
#include "skewheat/parallel.hpp"
#include "skewheat/solver.hpp"
#include "skewheat/stats.hpp"

namespace skewheat::harness {

struct RunOptions {
    /// Fill the seconds column and summary timing. Off by default so that
    /// outputs are bit-identical across runs.
    bool record_timing = false;
};

struct CheckRecord {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = true;
    bool diagnostic = false;
};

/// Paths written by simulate: one table per observation point.
struct PathTable {
    double x = 0.0;
    double location = 0.0;
    std::vector<std::vector<double>> replicates;  ///< [replicate][time index]
};

struct RunResult {
    std::vector<ResultRow> rows;
    std::vector<CheckRecord> checks;
    std::vector<PathTable> paths;
    double seconds = 0.0;

    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.diagnostic || c.passed; });
    }
};

namespace detail {

class Stopwatch {
public:
    explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        if (!enabled_) return 0.0;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

/// Simulates replicates 0..R-1 with the convolution solver and hands each
/// field to visit(r, field) in replicate order. Fields are computed in
/// parallel chunks; visiting is sequential, so reductions inside visit are
/// independent of the worker count.
template <class Visit>
void for_each_field(const ExperimentConfig& c, const GridSpec& grid, Visit&& visit) {
    const Medium medium(c.medium);
    const ConvolutionSolver solver(medium, grid, solver_options(c));
    const SigmaSpec sigma = parse_sigma(c.sigma);
    const std::size_t chunk = std::max<std::size_t>(1, c.workers * 2);
    std::vector<SolutionField> fields;
    for (std::size_t begin = 0; begin < c.replicates; begin += chunk) {
        const std::size_t count = std::min(chunk, c.replicates - begin);
        fields.assign(count, SolutionField{});
        parallel_for(count, c.workers, [&](std::size_t i) {
            const std::uint64_t r = begin + i;
            NoiseField noise;
            if (c.zero_noise) {
                noise.increments = RowMatrix::Zero(static_cast<Eigen::Index>(grid.n), static_cast<Eigen::Index>(grid.m));
                noise.seed = c.seed;
                noise.replicate = r;
            } else {
                noise = sample_noise(grid, c.seed, r);
            }
            fields[i] = solver.solve(sigma, noise);
        });
        for (std::size_t i = 0; i < count; ++i) visit(begin + i, fields[i]);
    }
}

/// paths[x index][replicate] at n_stat statistic steps, from either backend.
inline std::vector<std::vector<SolutionPath>> collect_paths(const ExperimentConfig& c, std::size_t n_stat) {
    std::vector<std::vector<SolutionPath>> paths(c.observe.size(), std::vector<SolutionPath>(c.replicates));
    if (c.backend.value() == Backend::exact_linear) {
        const Medium medium(c.medium);
        for (std::size_t k = 0; k < c.observe.size(); ++k) {
            const LinearPathSampler sampler(medium, c.observe[k], c.T, n_stat, c.workers);
            parallel_for(c.replicates, c.workers, [&](std::size_t r) { paths[k][r] = sampler.sample(c.seed, r); });
        }
    } else {
        for_each_field(c, simulation_grid(c, n_stat), [&](std::size_t r, const SolutionField& f) {
            for (std::size_t k = 0; k < c.observe.size(); ++k) paths[k][r] = f.path(c.observe[k], c.refine);
        });
    }
    return paths;
}

inline std::size_t cells_column(const ExperimentConfig& c) {
    return c.backend.value() == Backend::exact_linear ? 0 : c.m;
}

inline ResultRow base_row(const ExperimentConfig& c, std::size_t n, double x, const std::string& statistic) {
    ResultRow r;
    r.experiment = c.kind;
    r.backend = to_string(c.backend.value());
    r.n = n;
    r.m = cells_column(c);
    r.x = x;
    r.replicates = c.replicates;
    r.statistic = statistic;
    return r;
}

inline ResultRow sample_row(const ExperimentConfig& c, std::size_t n, double x, const std::string& statistic,
                            std::span<const double> sample, double target) {
    ResultRow r = base_row(c, n, x, statistic);
    const auto s = summarize(sample);
    r.value = s.mean;
    r.std_error = s.std_error;
    r.target = target;
    r.rel_error = relative_error(r.value, target);
    return r;
}

inline ResultRow value_row(const ExperimentConfig& c, std::size_t n, double x, const std::string& statistic,
                           double value, double target) {
    ResultRow r = base_row(c, n, x, statistic);
    r.value = value;
    r.target = target;
    r.rel_error = relative_error(value, target);
    return r;
}

/// Rows shared by quartic and convergence for one observation point.
inline void quartic_rows(const ExperimentConfig& c, std::size_t n, double x, std::span<const SolutionPath> paths,
                         std::vector<ResultRow>& rows) {
    const Medium medium(c.medium);
    const SigmaSpec sigma = parse_sigma(c.sigma);
    std::vector<double> v, limit, abs_err, estimates;
    std::size_t degenerate = 0;
    for (const auto& p : paths) {
        const auto rep = make_report(p, sigma, medium);
        v.push_back(rep.v_quartic);
        limit.push_back(rep.limit_value);
        abs_err.push_back(std::abs(rep.v_quartic - rep.limit_value));
        if (std::isnan(rep.estimator_A)) ++degenerate;
        else estimates.push_back(rep.estimator_A);
    }
    const double constant_limit = sigma.constant
                                      ? quartic_limit_unit_sigma(medium, x, c.T) * std::pow(*sigma.constant, 4)
                                      : not_available;
    const double v_target = sigma.constant ? constant_limit : summarize(limit).mean;
    rows.push_back(sample_row(c, n, x, "v_quartic", v, v_target));
    rows.push_back(sample_row(c, n, x, "limit_functional", limit, constant_limit));
    rows.push_back(sample_row(c, n, x, "abs_error", abs_err, not_available));
    rows.push_back(sample_row(c, n, x, "estimator_A", estimates, medium.diffusivity(x)));
    rows.push_back(value_row(c, n, x, "degenerate_paths", static_cast<double>(degenerate), 0.0));

    const auto moments = moment_summary(paths);
    const double delta = c.T / static_cast<double>(n);
    const bool gaussian = sigma.is_unit();
    rows.push_back(value_row(c, n, x, "mean_increment_sq", moments.mean_sq,
                             gaussian ? expected_increment_sq(medium, x, delta) : not_available));
    rows.push_back(value_row(c, n, x, "mean_increment_fourth", moments.mean_fourth,
                             gaussian ? expected_increment_fourth(medium, x, delta) : not_available));
    rows.push_back(value_row(c, n, x, "kurtosis_ratio", moments.kurtosis_ratio, gaussian ? 3.0 : not_available));
    rows.push_back(value_row(c, n, x, "sixth_moment_ratio", moments.sixth_ratio, gaussian ? 15.0 : not_available));
}

/// Least-squares slope of log(y) on log(x); NaN with fewer than two usable points.
inline double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    if (lx.size() < 2) return not_available;
    const double k = static_cast<double>(lx.size());
    const double mx = pairwise_sum(lx) / k, my = pairwise_sum(ly) / k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : not_available;
}

}  // namespace detail

inline RunResult cmd_kernel_selftest(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Stopwatch clock(opt.record_timing);
    RunResult out;
    for (const auto& check : checks::kernel_selftest(c.medium, c.seed)) {
        ResultRow r;
        r.experiment = "kernel-selftest";
        r.backend = "none";
        r.replicates = check.cases;
        r.statistic = check.name;
        r.value = check.value;
        r.target = check.threshold;
        out.rows.push_back(r);
        out.checks.push_back({check.name, check.value, check.threshold, check.passed, check.diagnostic});
    }
    out.seconds = clock.seconds();
    for (auto& r : out.rows) r.seconds = out.seconds;
    return out;
}

inline RunResult cmd_simulate(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Stopwatch clock(opt.record_timing);
    RunResult out;
    const Medium medium(c.medium);
    const GreenKernel kernel(medium);
    const SigmaSpec sigma = parse_sigma(c.sigma);
    const GridSpec grid = simulation_grid(c, c.n);

    out.paths.resize(c.observe.size());
    RowMatrix sum_sq = RowMatrix::Zero(static_cast<Eigen::Index>(grid.n + 1), static_cast<Eigen::Index>(grid.m));
    std::vector<std::vector<SolutionPath>> coarse(c.observe.size());
    double max_abs = 0.0;
    detail::for_each_field(c, grid, [&](std::size_t, const SolutionField& f) {
        sum_sq += f.values.cwiseAbs2();
        max_abs = std::max(max_abs, f.values.cwiseAbs().maxCoeff());
        for (std::size_t k = 0; k < c.observe.size(); ++k) {
            const auto p = f.path(c.observe[k]);
            out.paths[k].x = p.x;
            out.paths[k].location = p.location;
            out.paths[k].replicates.push_back(p.values);
            coarse[k].push_back(f.path(c.observe[k], c.refine));
        }
    });

    const double max_mean_sq = sum_sq.maxCoeff() / static_cast<double>(c.replicates);
    out.rows.push_back(detail::value_row(c, c.n, not_available, "max_mean_sq", max_mean_sq, not_available));
    if (c.zero_noise) {
        out.rows.push_back(detail::value_row(c, c.n, not_available, "max_abs_u", max_abs, 0.0));
        out.checks.push_back({"zero_noise_field_is_zero", max_abs, 0.0, max_abs == 0.0, false});
    }
    for (std::size_t k = 0; k < c.observe.size(); ++k) {
        const double x = c.observe[k];
        std::vector<double> terminal;
        for (const auto& p : coarse[k]) terminal.push_back(p.values.back());
        const auto s = summarize(terminal);
        double var = 0.0;
        for (double u : terminal) var += (u - s.mean) * (u - s.mean);
        var = terminal.size() > 1 ? var / static_cast<double>(terminal.size() - 1) : not_available;
        double var_target = not_available;
        if (c.zero_noise) var_target = 0.0;
        else if (sigma.constant) var_target = covariance_linear(c.T, c.T, x, kernel) * std::pow(*sigma.constant, 2);
        out.rows.push_back(detail::sample_row(c, c.n, x, "mean_u_T", terminal, 0.0));
        auto var_row = detail::value_row(c, c.n, x, "var_u_T", var, var_target);
        // Standard error of a Gaussian sample variance.
        var_row.std_error = var * std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(1, c.replicates - 1)));
        out.rows.push_back(var_row);
        if (sigma.constant && !c.zero_noise) {
            out.checks.push_back({"var_u_T_rel_error_x=" + format_double(x), var_row.rel_error, c.variance_tolerance,
                                  var_row.rel_error <= c.variance_tolerance, false});
        }
        const auto moments = moment_summary(coarse[k]);
        out.rows.push_back(detail::value_row(c, c.n, x, "kurtosis_ratio", moments.kurtosis_ratio,
                                             sigma.constant && !c.zero_noise ? 3.0 : not_available));
    }
    out.seconds = clock.seconds();
    for (auto& r : out.rows) r.seconds = out.seconds;
    return out;
}

inline RunResult cmd_quartic(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Stopwatch clock(opt.record_timing);
    RunResult out;
    const auto paths = detail::collect_paths(c, c.n);
    for (std::size_t k = 0; k < c.observe.size(); ++k) detail::quartic_rows(c, c.n, c.observe[k], paths[k], out.rows);
    out.seconds = clock.seconds();
    for (auto& r : out.rows) r.seconds = out.seconds;
    return out;
}

inline RunResult cmd_convergence(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Stopwatch total(opt.record_timing);
    RunResult out;
    const Medium medium(c.medium);
    const SigmaSpec sigma = parse_sigma(c.sigma);
    std::vector<std::vector<double>> errors(c.observe.size());
    std::vector<double> ns;

    for (const std::size_t n : c.n_list) {
        detail::Stopwatch clock(opt.record_timing);
        ExperimentConfig cn = c;
        cn.n = n;
        ns.push_back(static_cast<double>(n));
        std::vector<std::vector<SolutionPath>> paths(c.observe.size(), std::vector<SolutionPath>(c.replicates));
        // averaged[m index][replicate] = (V_nm, averaged limit functional)
        std::vector<std::vector<std::pair<double, double>>> averaged(c.m_list.size());
        if (c.backend.value() == Backend::exact_linear) {
            paths = detail::collect_paths(cn, n);
        } else {
            detail::for_each_field(cn, simulation_grid(cn, n), [&](std::size_t r, const SolutionField& f) {
                for (std::size_t k = 0; k < c.observe.size(); ++k) paths[k][r] = f.path(c.observe[k], c.refine);
                for (std::size_t j = 0; j < c.m_list.size(); ++j) {
                    const auto rep = averaged_variation(f, sigma, c.m_list[j], c.refine);
                    double lim = 0.0;
                    for (const auto& pp : rep.per_point) lim += pp.limit_value;
                    averaged[j].emplace_back(rep.v_nm, lim / static_cast<double>(c.m_list[j]));
                }
            });
        }
        const std::size_t first = out.rows.size();
        for (std::size_t k = 0; k < c.observe.size(); ++k) {
            const double x = c.observe[k];
            std::vector<double> err;
            const double unit_target = sigma.constant
                                           ? quartic_limit_unit_sigma(medium, x, c.T) * std::pow(*sigma.constant, 4)
                                           : not_available;
            for (const auto& p : paths[k]) {
                const double target = sigma.constant ? unit_target : limit_functional(p, sigma, medium);
                err.push_back(std::abs(quartic_variation(p) - target));
            }
            auto row = detail::sample_row(cn, n, x, "abs_error", err, 0.0);
            errors[k].push_back(row.value);
            out.rows.push_back(row);
            std::vector<double> v;
            for (const auto& p : paths[k]) v.push_back(quartic_variation(p));
            out.rows.push_back(detail::sample_row(cn, n, x, "v_quartic", v, unit_target));
        }
        for (std::size_t j = 0; j < c.m_list.size(); ++j) {
            const std::size_t m = c.m_list[j];
            double constant_target = not_available;
            if (sigma.constant) {
                double s = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    s += quartic_limit_unit_sigma(medium, static_cast<double>(i) / static_cast<double>(m), c.T);
                }
                constant_target = s / static_cast<double>(m) * std::pow(*sigma.constant, 4);
            }
            std::vector<double> v, lim, err;
            for (const auto& [vnm, l] : averaged[j]) {
                v.push_back(vnm);
                lim.push_back(l);
                err.push_back(std::abs(vnm - (sigma.constant ? constant_target : l)));
            }
            auto row = detail::sample_row(cn, n, not_available, "v_nm", v,
                                          sigma.constant ? constant_target : summarize(lim).mean);
            row.m = m;
            out.rows.push_back(row);
            auto erow = detail::sample_row(cn, n, not_available, "v_nm_abs_error", err, 0.0);
            erow.m = m;
            out.rows.push_back(erow);
        }
        const double secs = clock.seconds();
        for (std::size_t i = first; i < out.rows.size(); ++i) out.rows[i].seconds = secs;
    }
    for (std::size_t k = 0; k < c.observe.size(); ++k) {
        auto row = detail::value_row(c, 0, c.observe[k], "abs_error_log_slope",
                                     detail::log_log_slope(ns, errors[k]), not_available);
        row.seconds = total.seconds();
        out.rows.push_back(row);
    }
    out.seconds = total.seconds();
    return out;
}

inline RunResult cmd_estimate(const ExperimentConfig& c, const RunOptions& opt = {}) {
    detail::Stopwatch clock(opt.record_timing);
    RunResult out;
    const Medium medium(c.medium);
    const SigmaSpec sigma = parse_sigma(c.sigma);
    const auto paths = detail::collect_paths(c, c.n);
    for (std::size_t k = 0; k < c.observe.size(); ++k) {
        const double x = c.observe[k];
        const double truth = medium.diffusivity(x);
        std::vector<double> est;
        std::size_t degenerate = 0;
        for (const auto& p : paths[k]) {
            if (quartic_variation(p) > 0.0) est.push_back(estimate_diffusivity(p, sigma, medium));
            else ++degenerate;
        }
        const auto s = summarize(est);
        out.rows.push_back(detail::value_row(c, c.n, x, "estimator_median", s.median, truth));
        out.rows.push_back(detail::value_row(c, c.n, x, "estimator_q25", s.q25, truth));
        out.rows.push_back(detail::value_row(c, c.n, x, "estimator_q75", s.q75, truth));
        out.rows.push_back(detail::value_row(c, c.n, x, "estimator_iqr", s.q75 - s.q25, not_available));
        out.rows.push_back(detail::sample_row(c, c.n, x, "estimator_mean", est, truth));
        out.rows.push_back(detail::value_row(c, c.n, x, "degenerate_paths", static_cast<double>(degenerate), 0.0));
    }
    out.seconds = clock.seconds();
    for (auto& r : out.rows) r.seconds = out.seconds;
    return out;
}

/// Dispatches on c.kind; c must be resolved.
inline RunResult run_experiment(const ExperimentConfig& c, const RunOptions& opt = {}) {
    if (c.kind == "kernel-selftest") return cmd_kernel_selftest(c, opt);
    if (c.kind == "simulate") return cmd_simulate(c, opt);
    if (c.kind == "quartic") return cmd_quartic(c, opt);
    if (c.kind == "convergence") return cmd_convergence(c, opt);
    if (c.kind == "estimate") return cmd_estimate(c, opt);
    throw ConfigError("unknown experiment kind '" + c.kind + "'");
}

}  // namespace skewheat::harness
