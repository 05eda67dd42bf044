#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "minsde/stats.hpp"

namespace minsde {

// Number of worker threads: explicit request, else MINSDE_WORKERS, else
// hardware concurrency.
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MINSDE_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(batch, lo, hi) for every batch of the partition, distributing
// batches over `workers` threads. Each batch writes only to its own output
// slot, so results are identical for any worker count; callers must merge
// per-batch results in ascending batch order.
template <class Fn>
void run_batches(const Batches& batches, int workers, Fn&& fn) {
    const int n_batches = batches.count;
    if (workers <= 1 || n_batches <= 1) {
        for (int b = 0; b < n_batches; ++b) fn(b, batches.lo(b), batches.hi(b));
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    const int n_threads = workers < n_batches ? workers : n_batches;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int b = next.fetch_add(1, std::memory_order_relaxed);
                if (b >= n_batches || failed.load(std::memory_order_relaxed)) return;
                try {
                    fn(b, batches.lo(b), batches.hi(b));
                } catch (...) {
                    bool expected = false;
                    if (failed.compare_exchange_strong(expected, true)) {
                        first_error = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(first_error);
}

}
