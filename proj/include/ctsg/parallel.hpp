#pragma once

#include <cstddef>
#include <functional>

namespace ctsg {

/// Worker count: `requested` if positive, else $CTSG_THREADS, else the
/// hardware concurrency (at least 1).
unsigned resolve_threads(int requested);

/// Calls body(i) for i in [0, n) split into contiguous blocks over `threads`
/// workers. Each index is visited exactly once, so results written to
/// per-index slots do not depend on the thread count. The first exception
/// thrown by a worker is rethrown on the caller.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ctsg
