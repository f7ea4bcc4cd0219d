#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace cme {

// Worker budget: CME_THREADS if set (>=1), else hardware concurrency.
inline int thread_budget() {
    if (const char* s = std::getenv("CME_THREADS")) {
        int v = std::atoi(s);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Runs f(i) for i in [0, n).  Work is split into contiguous blocks, one per
// worker; results must be written to preallocated slots indexed by i so the
// outcome is independent of the thread count.
inline void parallel_for(int n, const std::function<void(int)>& f) {
    int workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (int i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace cme
