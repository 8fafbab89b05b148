#pragma once

#include <cstddef>
#include <functional>

namespace tda {

/// Number of workers used by parallel passes. Honors TDA_THREADS when set
/// to a positive integer, otherwise std::thread::hardware_concurrency().
std::size_t worker_count();

/// Overrides worker_count() for the current process (0 restores the default).
void set_worker_count(std::size_t workers);

/// Calls body(begin, end, worker) over disjoint chunks of [0, n). Chunks are
/// handed out dynamically; worker is in [0, worker_count()). The first
/// exception thrown by any chunk is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace tda
