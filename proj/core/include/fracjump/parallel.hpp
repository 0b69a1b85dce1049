#pragma once

#include <cstddef>
#include <functional>

namespace fracjump {

// Worker count: FRACJUMP_THREADS if set to a positive integer, otherwise the
// hardware concurrency.
int thread_count();

// Runs f(i) for i in [0, n) over thread_count() workers. The first exception
// thrown by any f is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace fracjump
