#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace infiltra {

// Runs fn(i) for every i in [begin, end) across the hardware threads.
// Callers must make the result independent of execution order; every use in
// this library operates on disjoint lines or merges with associative integer
// sums, so parallel output is identical to the sequential one. The first
// exception thrown by any worker is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn, std::size_t grain = 16) {
    if (end <= begin) return;
    const std::size_t n = end - begin;
    std::size_t workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min(workers, (n + grain - 1) / grain);
    if (workers <= 1) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{begin};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::once_flag error_once;
    auto run = [&] {
        try {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t lo = next.fetch_add(grain);
                if (lo >= end) break;
                const std::size_t hi = std::min(end, lo + grain);
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            }
        } catch (...) {
            std::call_once(error_once, [&] { error = std::current_exception(); });
            failed.store(true, std::memory_order_relaxed);
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 0; t + 1 < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace infiltra
