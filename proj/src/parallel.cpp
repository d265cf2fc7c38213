#include "nearfield/parallel.hpp"

#include <atomic>

namespace nearfield {

namespace {
std::atomic<int> g_default_threads{0};
}

int default_thread_count()
{
    const int configured = g_default_threads.load();
    if (configured > 0) {
        return configured;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_thread_count(int threads)
{
    g_default_threads.store(std::max(0, threads));
}

}  // namespace nearfield
