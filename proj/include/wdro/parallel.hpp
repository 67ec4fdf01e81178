#pragma once

#include <cstddef>
#include <functional>

namespace wdro {

/// Worker count used by parallel_for; 0 means std::thread::hardware_concurrency().
void set_worker_count(std::size_t workers);
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across the worker pool. Each index is visited
/// exactly once; callers write results into pre-sized slots indexed by i, so
/// the outcome does not depend on scheduling. The first exception thrown by
/// any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace wdro
