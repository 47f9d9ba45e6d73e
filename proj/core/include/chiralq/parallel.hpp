#pragma once

#include <cstddef>
#include <functional>

namespace chiralq {

// Process-wide worker count for parallel_for; 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Static block partition of [0, n). The first exception thrown by any
// worker is rethrown on the caller after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace chiralq
