#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace pairiv {

// Fixed chunking: chunk boundaries depend only on n, never on the worker
// count, so chunk-local accumulations combined in chunk order give results
// that are independent of how many threads ran.
inline constexpr std::size_t kParallelChunk = 4096;

inline std::size_t chunk_count(std::size_t n) {
    return (n + kParallelChunk - 1) / kParallelChunk;
}

// Resolve a requested worker count: <=0 means "use PAIRIV_WORKERS, else
// hardware concurrency".
int resolve_workers(int requested);

// Calls fn(chunk_index, begin, end) for every chunk of [0, n).
void parallel_chunks(std::size_t n, int workers,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace pairiv
