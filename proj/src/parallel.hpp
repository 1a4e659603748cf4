#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace finsler::detail {

// Chunked parallel loop with chunk boundaries independent of the worker
// count, so reductions over per-chunk slots stay bit-identical for any
// number of threads.
constexpr long long kChunk = 4096;

inline long long chunk_count(long long items) { return (items + kChunk - 1) / kChunk; }

template <class Fn>
void parallel_chunks(long long items, int threads, Fn&& fn) {
    const long long chunks = chunk_count(items);
    if (threads <= 1 || chunks <= 1) {
        for (long long c = 0; c < chunks; ++c)
            fn(c, c * kChunk, std::min(items, (c + 1) * kChunk));
        return;
    }
    std::atomic<long long> next{0};
    auto worker = [&] {
        for (;;) {
            long long c = next.fetch_add(1);
            if (c >= chunks) break;
            fn(c, c * kChunk, std::min(items, (c + 1) * kChunk));
        }
    };
    std::vector<std::thread> pool;
    int nt = static_cast<int>(std::min<long long>(threads, chunks));
    pool.reserve(nt - 1);
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace finsler::detail
