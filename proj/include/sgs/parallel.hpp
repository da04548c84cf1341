#pragma once

#include <cstddef>
#include <functional>

namespace sgs {

/// Worker count: SGS_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Callers write
/// results into per-index slots so the reduction order stays fixed. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace sgs
