#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace prabhakar {

/// Worker count: PRABHAKAR_THREADS if set to a positive integer, otherwise
/// the hardware concurrency, never more than the number of work items.
inline unsigned worker_count(std::size_t items) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PRABHAKAR_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(std::min<long>(v, 1024));
    }
    return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, items)));
}

/// Runs body(state, i) for i in [0, n). Every worker owns a state created by
/// make_state(), so non-thread-safe caches can be used without locking.
/// Items are split into contiguous blocks; results never depend on the
/// schedule. If several items throw, the exception of the lowest item wins.
template <class MakeState, class Body>
void parallel_for(std::size_t n, MakeState make_state, Body body) {
    if (n == 0) return;
    const unsigned workers = worker_count(n);
    if (workers == 1) {
        auto state = make_state();
        for (std::size_t i = 0; i < n; ++i) body(state, i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers;
        const std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([&, w, lo, hi] {
            try {
                auto state = make_state();
                for (std::size_t i = lo; i < hi; ++i) body(state, i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (unsigned w = 0; w < workers; ++w) {
        if (errors[w]) std::rethrow_exception(errors[w]);
    }
}

}  // namespace prabhakar
