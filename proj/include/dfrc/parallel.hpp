#pragma once

#include <cstddef>
#include <functional>

namespace dfrc {

/// Worker count: DFRC_THREADS if set and positive, else hardware concurrency.
int worker_count();

/// Run fn(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dfrc
