#pragma once

// Static round-robin split of an index range over a fixed number of threads.
// Every index is handled by exactly one call, so results written to
// per-index slots do not depend on the thread count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace spine {

// Worker count from an explicit request, then SPINE_THREADS, then hardware.
unsigned resolve_workers(unsigned requested);

template <typename Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
    const auto threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, workers), count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace spine
