#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace skewheat {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Space-time discretisation: n time steps of size T/n over [0, T] and m
/// spatial cells of width 2L/m over [-L, L].
struct GridSpec {
    double T = 1.0;
    std::size_t n = 1;
    double L = 1.0;
    std::size_t m = 1;

    double delta() const noexcept { return T / static_cast<double>(n); }
    double dx() const noexcept { return 2.0 * L / static_cast<double>(m); }
    double center(std::size_t l) const noexcept { return -L + (static_cast<double>(l) + 0.5) * dx(); }
    /// Exact at k == n.
    double time(std::size_t k) const noexcept {
        return k == n ? T : static_cast<double>(k) * T / static_cast<double>(n);
    }

    /// Index of the cell centre nearest to x; ties go to the left cell.
    std::size_t snap(double x) const {
        if (!(x > -L && x < L)) throw std::out_of_range("observation point outside the spatial grid");
        const double pos = (x + L) / dx() - 0.5;
        auto l = static_cast<std::ptrdiff_t>(std::ceil(pos - 0.5));
        l = std::clamp<std::ptrdiff_t>(l, 0, static_cast<std::ptrdiff_t>(m) - 1);
        return static_cast<std::size_t>(l);
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline GridSpec build_grid(double T, std::size_t n, double L, std::size_t m) {
    if (!(std::isfinite(T) && T > 0.0)) throw std::invalid_argument("grid: T must be positive");
    if (n < 1) throw std::invalid_argument("grid: n must be at least 1");
    if (!(std::isfinite(L) && L > 0.0)) throw std::invalid_argument("grid: L must be positive");
    if (m < 1) throw std::invalid_argument("grid: m must be at least 1");
    return GridSpec{T, n, L, m};
}

namespace rng {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32(Counter c, Key k) noexcept {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        k[0] += w0;
        k[1] += w1;
    }
    return c;
}

inline double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) noexcept {
    // 53 random bits mapped to (0, 1].
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

/// Standard normal number `index` of stream (seed, replicate). Pairs of
/// indices share one Philox block and one Box-Muller transform, so every
/// value depends only on (seed, replicate, index).
inline double standard_normal(std::uint64_t seed, std::uint64_t replicate, std::uint64_t index) noexcept {
    const std::uint64_t block = index >> 1;
    const Counter ctr = {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                         static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
    const Key key = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const Counter r = philox4x32(ctr, key);
    const double u1 = to_unit_open_closed(r[0], r[1]);
    const double u2 = to_unit_open_closed(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (index & 1u) ? radius * std::sin(angle) : radius * std::cos(angle);
}

/// Uniform on (0, 1] from the same counter space; used for randomized checks.
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
    const Counter ctr = {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                         static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32) ^ 0x80000000u};
    const Key key = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    const Counter r = philox4x32(ctr, key);
    return to_unit_open_closed(r[0], r[1]);
}

inline constexpr const char* generator_name = "philox4x32-10";
inline constexpr const char* gaussian_transform = "box-muller";

}  // namespace rng

/// White-noise increments W([s_k, s_k+1) x cell_l), i.i.d. N(0, delta dx).
struct NoiseField {
    RowMatrix increments;  ///< n x m
    std::uint64_t seed = 0;
    std::uint64_t replicate = 0;
};

inline NoiseField sample_noise(const GridSpec& grid, std::uint64_t seed, std::uint64_t replicate) {
    NoiseField field;
    field.seed = seed;
    field.replicate = replicate;
    field.increments.resize(static_cast<Eigen::Index>(grid.n), static_cast<Eigen::Index>(grid.m));
    const double scale = std::sqrt(grid.delta() * grid.dx());
    double* data = field.increments.data();
    const std::uint64_t total = static_cast<std::uint64_t>(grid.n) * grid.m;
    for (std::uint64_t c = 0; c < total; ++c) data[c] = scale * rng::standard_normal(seed, replicate, c);
    return field;
}

}  // namespace skewheat
