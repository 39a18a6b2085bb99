#include "kprune/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace kprune::parallel {

namespace {

int env_thread_count() {
    const char* raw = std::getenv("KOOPMAN_PRUNE_THREADS");
    if (raw == nullptr) return 1;
    const int n = std::atoi(raw);
    return n >= 1 ? n : 1;
}

std::atomic<int> g_threads{0};  // 0 = not yet resolved

}  // namespace

int thread_count() {
    int n = g_threads.load(std::memory_order_relaxed);
    if (n == 0) {
        n = env_thread_count();
        g_threads.store(n, std::memory_order_relaxed);
    }
    return n;
}

void set_thread_count(int n) {
    g_threads.store(n >= 1 ? n : 1, std::memory_order_relaxed);
}

}  // namespace kprune::parallel
