#include "hetcap/parallel.hpp"

#include "hetcap/error.hpp"

namespace hetcap {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(); }

void set_thread_count(int n) {
  if (n < 1) throw InputError("thread count must be >= 1");
  g_threads.store(n);
}

}  // namespace hetcap
