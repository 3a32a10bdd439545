#include "nestquant/parallel.hpp"

#include <omp.h>

#include <atomic>

namespace nestquant {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int threads) { g_max_threads.store(threads < 1 ? 0 : threads); }

int max_threads() {
  const int t = g_max_threads.load();
  return t > 0 ? t : omp_get_num_procs();
}

}  // namespace nestquant
