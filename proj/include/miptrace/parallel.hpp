#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace miptrace {

inline int default_worker_count() {
    unsigned int n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs fn(i) for i in [0, count) across at most `workers` threads using a
/// static block partition. Every index is handled by exactly one worker, so
/// results are independent of the worker count as long as fn writes only to
/// cells owned by its index.
template <typename Fn>
void parallel_for(size_t count, int workers, Fn&& fn) {
    if (workers < 1) workers = 1;
    if (static_cast<size_t>(workers) > count) workers = count == 0 ? 1 : static_cast<int>(count);
    if (workers == 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const size_t chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const size_t begin = static_cast<size_t>(w) * chunk;
        const size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace miptrace
