#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace smallnoise {

inline int effective_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). fn must only write to storage owned by index i;
// results are then independent of the thread schedule.
inline void parallel_for(long n, const std::function<void(long)>& fn, int n_threads = 0) {
    const int threads = effective_threads(n_threads);
    if (threads == 1 || n <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// Fixed contiguous partition of [0, n) into n_blocks ranges, each handed to
// fn(block_index, begin, end). The partition does not depend on the thread
// count, so block-local accumulators merged in block order give identical
// results on every run.
inline void parallel_for_blocks(long n, int n_blocks,
                                const std::function<void(int, long, long)>& fn,
                                int n_threads = 0) {
    if (n_blocks < 1) n_blocks = 1;
    parallel_for(
        n_blocks,
        [&](long b) {
            const long begin = n * b / n_blocks;
            const long end = n * (b + 1) / n_blocks;
            if (begin < end) fn(static_cast<int>(b), begin, end);
        },
        n_threads);
}

}  // namespace smallnoise
