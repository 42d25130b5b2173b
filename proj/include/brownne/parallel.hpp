#pragma once

#include <cstddef>
#include <functional>

namespace brownne {

/// Worker count from BROWNNE_THREADS, else hardware concurrency, at least 1.
int default_thread_count();

/// Calls body(i) for i in [0, count) on up to `threads` workers. Work is
/// handed out by index, so any result written to slot i is independent of the
/// worker count. The first exception thrown by a body is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace brownne
