#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nearfield {

// Worker count used by library loops when the caller passes 0.
int default_thread_count();
void set_default_thread_count(int threads);

// Runs body(i) for i in [0, n) over a static partition. Results must be written to
// per-index slots; any reduction happens afterwards in index order, so output never
// depends on the thread count. The first exception thrown by a worker is rethrown.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body&& body)
{
    if (threads <= 0) {
        threads = default_thread_count();
    }
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    const std::size_t used = std::min(workers, n);
    std::vector<std::exception_ptr> errors(used);
    std::vector<std::thread> pool;
    pool.reserve(used);
    for (std::size_t w = 0; w < used; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += used) {
                    body(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace nearfield
