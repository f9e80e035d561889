#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ibo {

/// Number of worker threads used by the parallel loops. 0 means one per
/// hardware thread.
inline std::size_t& parallel_threads() {
    static std::size_t n = 0;
    return n;
}

/// Runs body(i) for i in [0, n) on a small pool of threads. Iterations are
/// claimed dynamically; callers write results to slot i so the outcome does
/// not depend on scheduling.
inline thread_local bool in_parallel_region = false;

template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    std::size_t workers = parallel_threads();
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1 || in_parallel_region) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        in_parallel_region = true;
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
        in_parallel_region = false;
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace ibo
