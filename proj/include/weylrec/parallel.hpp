#pragma once

// Index-parallel loops over independent work items. Each item writes only its
// own slot, so serial and OpenMP runs produce bit-identical results.

#include <cstddef>
#include <exception>
#include <mutex>

#include <omp.h>

namespace weylrec {

enum class Execution { Serial, Parallel };

/// Runs body(i) for i in [0, count). The first exception thrown by any item is
/// rethrown after the loop; remaining items still run to completion.
template <class Body>
void for_each_index(std::size_t count, Execution mode, Body&& body, int threads = 0) {
  if (mode == Execution::Serial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace weylrec
