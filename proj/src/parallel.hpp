// Index-parallel loop used by the sweeps: serial reference path or OpenMP, same results.
#pragma once

#include <omp.h>

#include <exception>
#include <mutex>

namespace relax::detail {

/// Runs body(i) for i in [0, n). Bodies must write to disjoint slots so that the merged result
/// does not depend on scheduling. The first exception thrown by any body is rethrown.
template <class F>
void for_each_index(long n, bool parallel, int jobs, F&& body) {
  if (!parallel) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace relax::detail
