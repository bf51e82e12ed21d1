#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace pielm {

/// Worker count used by batch loops. PIELM_THREADS caps it; unset or
/// invalid falls back to the hardware concurrency.
inline int max_threads() {
    static const int cached = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw < 1) hw = 1;
        if (const char* env = std::getenv("PIELM_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v >= 1) return static_cast<int>(std::min(v, 1024L));
        }
        return hw;
    }();
    return cached;
}

namespace detail {
inline thread_local int parallel_depth = 0;
}

/// Runs body(chunk_begin, chunk_end) over a partition of [begin, end) into
/// contiguous chunks. The partition depends only on the range and n_threads
/// never on scheduling, and chunks must write disjoint outputs, so results
/// are independent of how many workers actually run. Nested calls degrade to
/// serial execution instead of spawning threads from worker threads.
template <typename Body>
void parallel_for(std::int64_t begin, std::int64_t end, Body&& body, int n_threads = 0) {
    const std::int64_t n = end - begin;
    if (n <= 0) return;
    int workers = n_threads > 0 ? n_threads : max_threads();
    workers = static_cast<int>(std::min<std::int64_t>(workers, n));
    if (workers <= 1 || detail::parallel_depth > 0) {
        body(begin, end);
        return;
    }
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) {
        const std::int64_t lo = begin + w * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] {
            detail::parallel_depth = 1;
            body(lo, hi);
        });
    }
    ++detail::parallel_depth;
    body(begin, std::min(end, begin + chunk));
    --detail::parallel_depth;
    for (auto& t : pool) t.join();
}

}  // namespace pielm
