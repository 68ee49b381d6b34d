#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace screenbem {

inline int resolve_threads(int requested) {
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(begin, end) over a contiguous partition of [0, n). Each index is
/// processed by exactly one invocation.
inline void parallel_chunks(std::size_t n, int threads,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n < 2) {
        fn(0, n);
        return;
    }
    const std::size_t nchunks = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nchunks);
    for (std::size_t c = 0; c < nchunks; ++c) {
        const std::size_t begin = n * c / nchunks;
        const std::size_t end = n * (c + 1) / nchunks;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool)
        t.join();
}

} // namespace screenbem
