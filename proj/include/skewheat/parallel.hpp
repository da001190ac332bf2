#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace skewheat {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items
/// are claimed dynamically, so bodies must write only to slot i. The first
/// exception thrown by any body is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t count, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

/// Pairwise summation; the result depends only on the order of `values`.
template <class Range>
double pairwise_sum(const Range& values) {
    const auto first = std::begin(values);
    const auto size = static_cast<std::size_t>(std::distance(first, std::end(values)));
    auto rec = [&](auto&& self, std::size_t lo, std::size_t hi) -> double {
        if (hi - lo <= 16) {
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i) s += static_cast<double>(*(first + static_cast<std::ptrdiff_t>(i)));
            return s;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        return self(self, lo, mid) + self(self, mid, hi);
    };
    return rec(rec, 0, size);
}

}  // namespace skewheat
