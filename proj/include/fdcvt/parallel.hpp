#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fdcvt {

/// Worker count for replication loops: FCVT_THREADS if set (0 = auto),
/// otherwise the hardware concurrency.
inline int worker_count() {
    int n = 0;
    if (const char* env = std::getenv("FCVT_THREADS")) {
        n = std::atoi(env);
        if (n < 0) n = 0;
    }
    if (n == 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, n);
}

/// Run fn(begin, end) over a static partition of [0, count). Results must be
/// written to per-item slots by the callers; aggregation done afterwards in
/// item order is then independent of the thread count.
inline void parallel_chunks(int count, const std::function<void(int, int)>& fn) {
    const int workers = std::min(worker_count(), std::max(1, count));
    if (workers == 1 || count <= 1) {
        fn(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fn, begin, end);
    }
    for (auto& t : pool) t.join();
}

} // namespace fdcvt
