#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fmdt {

// Rows are always processed in fixed-size chunks, independent of the worker
// count; whoever computes a chunk stores its partial result in the chunk's
// slot and partials are folded in ascending chunk order. Reductions are
// therefore bit-identical for 1 or N workers.
inline constexpr std::size_t kChunkRows = 8192;

// Runs fn(i) for i in [0, count), pulling indices from a shared counter.
// Exceptions are collected and the first one rethrown after the join.
template <typename SlotFn>
void parallel_slots(std::size_t count, int workers, SlotFn fn) {
    if (count == 0) return;
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Calls fn(chunk_index, begin, end) once per chunk of [0, n).
template <typename ChunkFn>
void for_each_chunk(std::size_t n, int workers, ChunkFn fn) {
    if (n == 0) return;
    const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
    parallel_slots(chunks, workers, [&](std::size_t c) {
        const std::size_t lo = c * kChunkRows;
        const std::size_t hi = std::min(lo + kChunkRows, n);
        fn(c, lo, hi);
    });
}

// Deterministic weighted accumulation: fill(begin, end, buf) adds each chunk's
// contributions into a zeroed buffer of `width` doubles; chunk buffers are
// summed elementwise in ascending chunk order.
template <typename FillFn>
std::vector<double> chunked_accumulate(std::size_t n, std::size_t width, int workers,
                                       FillFn fill) {
    std::vector<double> acc(width, 0.0);
    if (n == 0) return acc;
    const std::size_t chunks = (n + kChunkRows - 1) / kChunkRows;
    std::vector<std::vector<double>> partials(chunks);
    for_each_chunk(n, workers, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        partials[c].assign(width, 0.0);
        fill(lo, hi, partials[c].data());
    });
    for (std::size_t c = 0; c < chunks; ++c)
        for (std::size_t i = 0; i < width; ++i) acc[i] += partials[c][i];
    return acc;
}

}  // namespace fmdt
