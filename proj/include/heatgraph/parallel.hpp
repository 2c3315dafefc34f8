#pragma once

#include <cstddef>
#include <functional>

namespace heatgraph {

// HEATGRAPH_THREADS if set and positive, otherwise the hardware concurrency.
std::size_t default_threads();

// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace heatgraph
