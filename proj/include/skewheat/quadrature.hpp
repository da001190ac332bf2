#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <vector>

namespace skewheat::quadrature {

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t intervals = 0;
};

struct Tolerance {
    double absolute = 1e-12;
    double relative = 1e-12;
    std::size_t max_intervals = 2000;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half plus centre).
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(mid);
    double kronrod = fc * kronrod_weights[7];
    double gauss = fc * gauss_weights[3];
    for (std::size_t k = 0; k < 7; ++k) {
        const double dx = half * kronrod_nodes[k];
        const double pair = f(mid - dx) + f(mid + dx);
        kronrod += kronrod_weights[k] * pair;
        if (k % 2 == 1) gauss += gauss_weights[k / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi].
/// The interval with the largest error estimate is bisected until the summed
/// error meets max(absolute, relative * |value|).
template <class F>
Result integrate(F&& f, double lo, double hi, const Tolerance& tol = {}) {
    if (!(lo <= hi)) throw std::invalid_argument("quadrature: lo must not exceed hi");
    Result out;
    if (lo == hi) return out;

    std::priority_queue<detail::Segment> heap;
    auto first = detail::gk15(f, lo, hi);
    double value = first.value;
    double error = first.error;
    heap.push(first);
    std::size_t count = 1;
    while (error > std::max(tol.absolute, tol.relative * std::abs(value)) &&
           count < tol.max_intervals) {
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (mid <= worst.lo || mid >= worst.hi) {
            heap.push(worst);
            break;
        }
        const auto left = detail::gk15(f, worst.lo, mid);
        const auto right = detail::gk15(f, mid, worst.hi);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    // Re-sum from the leaves; the running totals drift by rounding.
    value = 0.0;
    error = 0.0;
    std::vector<detail::Segment> leaves;
    leaves.reserve(heap.size());
    while (!heap.empty()) {
        leaves.push_back(heap.top());
        heap.pop();
    }
    std::sort(leaves.begin(), leaves.end(),
              [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (const auto& s : leaves) {
        value += s.value;
        error += s.error;
    }
    out.value = value;
    out.error = error;
    out.intervals = count;
    return out;
}

/// Integrates over consecutive breakpoints, each piece adaptively.
template <class F>
Result integrate_pieces(F&& f, const std::vector<double>& breakpoints, const Tolerance& tol = {}) {
    Result total;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const auto piece = integrate(f, breakpoints[i], breakpoints[i + 1], tol);
        total.value += piece.value;
        total.error += piece.error;
        total.intervals += piece.intervals;
    }
    return total;
}

}  // namespace skewheat::quadrature
