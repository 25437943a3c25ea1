#pragma once

#include <cstddef>
#include <functional>

namespace isip4d {

/// Number of worker threads used by the data-parallel passes. Defaults to
/// std::thread::hardware_concurrency(). Results never depend on it: every
/// pass writes disjoint outputs from read-only inputs.
int thread_count();
void set_thread_count(int n);

/// Splits [0, n) into contiguous chunks, one per worker, and calls
/// body(begin, end) on each. Blocks until all chunks finish; rethrows the
/// first exception raised by a worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace isip4d
