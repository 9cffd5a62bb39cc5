// parallel.hpp
// Minimal index-parallel loop. Results are written by index, so the output
// order never depends on scheduling.

#pragma once

#include <cstddef>
#include <functional>

namespace eploop {

// Number of worker threads: EPLOOP_THREADS if set (>= 1), otherwise the
// hardware concurrency.
std::size_t worker_count();

// Calls fn(i) for i in [0, n). The first exception thrown by any task is
// rethrown on the calling thread after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace eploop
