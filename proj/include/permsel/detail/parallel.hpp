#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace permsel::detail {

inline std::size_t default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are disjoint,
// so a body that writes only to its own indices yields scheduling-independent
// output. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::size_t n, std::size_t n_threads, Body&& body) {
    if (n == 0) return;
    if (n_threads == 0) n_threads = default_thread_count();
    n_threads = std::min(n_threads, n);
    if (n_threads == 1) {
        body(std::size_t{0}, n);
        return;
    }

    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    const std::size_t chunk = n / n_threads;
    const std::size_t extra = n % n_threads;
    std::size_t begin = 0;
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t end = begin + chunk + (t < extra ? 1 : 0);
        workers.emplace_back([&, t, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace permsel::detail
