#pragma once

#include "lpinfer/types.hpp"

#include <exception>
#include <vector>

#ifdef LPINFER_HAVE_OPENMP
#include <omp.h>
#endif

namespace lpinfer {

enum class Execution { Serial, Parallel };

/// Worker cap for Parallel kernels. 0 means the OpenMP default.
void set_thread_count(int n);
int thread_count();

/// Runs f(i) for i in [0, n). Every iteration writes only its own slot, so the
/// result does not depend on the schedule. The exception of the lowest failing
/// index is rethrown after the loop.
template <class F>
void for_each_index(Index n, Execution exec, F&& f) {
  if (exec == Execution::Serial || n < 2) {
    for (Index i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#ifdef LPINFER_HAVE_OPENMP
  const int t = thread_count();
#pragma omp parallel for schedule(dynamic, 4) num_threads(t > 0 ? t : omp_get_max_threads())
#endif
  for (Index i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace lpinfer
