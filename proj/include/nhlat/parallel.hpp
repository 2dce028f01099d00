// parallel.hpp: a small static-partition parallel_for.
// The worker cap comes from NHLAT_THREADS (default: hardware concurrency). Work items
// write to disjoint slots, so results do not depend on the worker count.

#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace nhlat {

int worker_count();

// Calls body(i) for i in [0, n). If any call throws, the exception with the lowest
// index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace nhlat
