#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace swerect {

inline int& worker_count_storage() {
    static int n = 1;
    return n;
}

// n = 0 picks the hardware concurrency.
inline void set_threads(int n) {
    if (n <= 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
    }
    worker_count_storage() = n > 0 ? n : 1;
}

inline int thread_count() {
    return worker_count_storage();
}

// Runs f(i) for i in [begin, end). Partitions the range across the configured
// workers; every index is touched exactly once, so f must not write outside
// its own slot.
template <class F>
void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end, F&& f) {
    const std::ptrdiff_t count = end - begin;
    const int workers = thread_count();
    if (workers <= 1 || count < 4 * static_cast<std::ptrdiff_t>(workers)) {
        for (std::ptrdiff_t i = begin; i < end; ++i) f(i);
        return;
    }
    const std::ptrdiff_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) {
        const std::ptrdiff_t lo = begin + chunk * w;
        const std::ptrdiff_t hi = lo + chunk < end ? lo + chunk : end;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (std::ptrdiff_t i = lo; i < hi; ++i) f(i);
        });
    }
    const std::ptrdiff_t hi0 = begin + chunk < end ? begin + chunk : end;
    for (std::ptrdiff_t i = begin; i < hi0; ++i) f(i);
    for (auto& th : pool) th.join();
}

}  // namespace swerect
