#pragma once

#include <cstddef>
#include <functional>

namespace rellandau {

/// Worker threads used by parallel loops. Defaults to RELLANDAU_THREADS when
/// set to a positive integer, else std::thread::hardware_concurrency().
unsigned worker_threads();
void set_worker_threads(unsigned n);

/// Calls body(begin, end) on disjoint contiguous chunks covering [0, n).
/// Results must be written to per-index slots so the outcome does not depend
/// on the number of threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace rellandau
