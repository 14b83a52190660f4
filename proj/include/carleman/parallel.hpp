#pragma once

#include <cstddef>
#include <functional>

namespace carleman {

/// Worker count: `requested` (0 = hardware concurrency), capped by the
/// CARLEMAN_LAB_THREADS environment variable when it holds a positive integer.
unsigned worker_count(unsigned requested = 0);

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// handled exactly once; callers store per-index results and reduce them in
/// index order afterwards, so results do not depend on scheduling. The first
/// exception thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned workers = 0);

}  // namespace carleman
