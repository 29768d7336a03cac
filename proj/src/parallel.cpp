#include "lpinfer/parallel.hpp"

#include <atomic>

namespace lpinfer {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() { return g_threads.load(); }

}  // namespace lpinfer
