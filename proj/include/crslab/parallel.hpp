#ifndef CRSLAB_PARALLEL_HPP
#define CRSLAB_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace crslab {

// Resolves a worker-count request: 0 means "auto" (bounded by hardware).
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return static_cast<int>(hw > 8 ? 8 : hw);
}

// Runs fn(begin, end, block_index) over [0,n) split into fixed-size blocks.
// Workers pull blocks from a shared counter. Results must be written into
// per-block slots and reduced in block order by the caller, so the outcome
// does not depend on the number of threads.
inline void parallel_blocks(std::int64_t n, std::int64_t block_size, int threads,
                            const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    if (block_size <= 0) block_size = 1;
    const std::int64_t num_blocks = (n + block_size - 1) / block_size;
    threads = resolve_threads(threads);
    if (threads > num_blocks) threads = static_cast<int>(num_blocks);

    if (threads <= 1) {
        for (std::int64_t blk = 0; blk < num_blocks; ++blk) {
            const std::int64_t lo = blk * block_size;
            const std::int64_t hi = lo + block_size < n ? lo + block_size : n;
            fn(lo, hi, blk);
        }
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::int64_t blk = next.fetch_add(1);
                if (blk >= num_blocks) return;
                const std::int64_t lo = blk * block_size;
                const std::int64_t hi = lo + block_size < n ? lo + block_size : n;
                fn(lo, hi, blk);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace crslab

#endif
