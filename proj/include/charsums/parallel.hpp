#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace charsums {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers write results
// into preallocated slots indexed by i, so the outcome is independent of the
// scheduling; the first exception (by cell index) is rethrown.
inline void parallel_for_indexed(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (jobs <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::atomic<std::size_t> next{0};
    std::vector<std::pair<std::size_t, std::exception_ptr>> errors(workers, {n, nullptr});
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!errors[w].second) errors[w] = {i, std::current_exception()};
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    std::size_t best = n;
    std::exception_ptr eptr = nullptr;
    for (auto& [i, e] : errors)
        if (e && i < best) { best = i; eptr = e; }
    if (eptr) std::rethrow_exception(eptr);
}

}  // namespace charsums
