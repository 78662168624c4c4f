#pragma once

#include <cstddef>
#include <functional>

namespace itmdp {

/// Worker count used by the library: hardware concurrency, capped by the
/// ITMDP_THREADS environment variable when it holds a positive integer.
std::size_t worker_count();

/// Runs body(i) for every i in [0, count). Indices are split into contiguous
/// blocks, one per worker; callers write results into slot i so that the
/// outcome never depends on scheduling. Exceptions from any worker are
/// rethrown on the calling thread (the one from the lowest block wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace itmdp
