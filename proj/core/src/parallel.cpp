#include "pairiv/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <string>

namespace pairiv {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PAIRIV_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_chunks(std::size_t n, int workers,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t chunks = chunk_count(n);
    const int nw = std::min<std::size_t>(std::max(workers, 1), chunks);
    if (nw <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            fn(c, c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            try {
                fn(c, c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(nw);
    for (int i = 0; i < nw; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pairiv
