#pragma once

#include <exception>
#include <mutex>

#include "hps/cmatrix.hpp"

namespace hps {

/// Enables two active levels of OpenMP parallelism (outer box loop, inner
/// linear algebra). Idempotent.
void enable_nested_parallelism();

/// Number of hardware threads reported by the OpenMP runtime.
int hardware_threads();

/// Runs body(c) for c in [0, chunks) with a static split over `workers`
/// threads. body must not throw.
template <class Body>
void parallel_chunks(int workers, Index chunks, Body&& body) {
  if (workers <= 1 || chunks <= 1) {
    for (Index c = 0; c < chunks; ++c) body(c);
    return;
  }
#pragma omp parallel for num_threads(workers) schedule(static)
  for (Index c = 0; c < chunks; ++c) body(c);
}

/// Like parallel_chunks but body may throw. Iterations that start after a
/// failure are skipped; the first exception is rethrown after the loop.
template <class Body>
void parallel_chunks_checked(int workers, Index chunks, Body&& body) {
  std::exception_ptr first;
  std::mutex guard;
  bool failed = false;
  auto run = [&](Index c) {
    {
      std::lock_guard lock(guard);
      if (failed) return;
    }
    try {
      body(c);
    } catch (...) {
      std::lock_guard lock(guard);
      if (!failed) {
        failed = true;
        first = std::current_exception();
      }
    }
  };
  parallel_chunks(workers, chunks, run);
  if (first) std::rethrow_exception(first);
}

}  // namespace hps
