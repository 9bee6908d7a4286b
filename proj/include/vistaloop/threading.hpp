#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace vistaloop {

// Worker count: explicit argument wins, then VISTALOOP_THREADS, then 1.
// A value of 0 means "auto" (hardware concurrency).
inline int resolve_thread_count(int requested = -1) {
    int n = requested;
    if (n < 0) {
        if (const char* env = std::getenv("VISTALOOP_THREADS"))
            n = std::atoi(env);
        else
            n = 1;
    }
    if (n == 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return n < 1 ? 1 : n;
}

// Static block partition over [0, count). Tasks must write disjoint slots;
// results are then identical for any worker count.
inline void parallel_for(int count, const std::function<void(int)>& fn, int requested_threads = -1) {
    const int threads = std::min(resolve_thread_count(requested_threads), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += threads) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace vistaloop
