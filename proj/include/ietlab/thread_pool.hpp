#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ietlab {

inline std::atomic<unsigned>& worker_override() {
    static std::atomic<unsigned> v{0};
    return v;
}

inline void set_worker_count(unsigned n) { worker_override().store(n); }

inline unsigned worker_count() {
    unsigned forced = worker_override().load();
    if (forced >= 1) return forced;
    if (const char* env = std::getenv("IETLAB_THREADS")) {
        long n = std::atol(env);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs fn(chunk) for chunk = 0..chunks-1 on a transient pool. Each chunk
// writes only its own slot, so the merged result is schedule-independent.
inline void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& fn,
                            unsigned threads = 0) {
    if (threads == 0) threads = worker_count();
    if (threads <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error = nullptr;
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    auto worker = [&]() {
        while (true) {
            std::size_t c = next.fetch_add(1);
            if (c >= chunks || failed.load()) return;
            try {
                fn(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!failed.exchange(true)) first_error = std::current_exception();
                return;
            }
        }
    };
    unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(chunks));
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load() && first_error) std::rethrow_exception(first_error);
}

} // namespace ietlab
