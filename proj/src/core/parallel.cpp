#include "core/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace svr::core {

namespace {
std::atomic<ExecMode> g_mode{ExecMode::openmp};
}

ExecMode exec_mode() { return g_mode.load(std::memory_order_relaxed); }

void set_exec_mode(ExecMode m) { g_mode.store(m, std::memory_order_relaxed); }

int thread_count() {
#ifdef _OPENMP
  if (exec_mode() == ExecMode::serial) return 1;
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void force_single_thread() {
  set_exec_mode(ExecMode::serial);
#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
}

}  // namespace svr::core
