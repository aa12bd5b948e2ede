#pragma once

#include <cstddef>
#include <functional>

namespace stackelberg {

// Worker count: SOLVER_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs body(0) .. body(count - 1) on up to `workers` threads (0 means
// worker_count()). The first exception thrown by a task is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t workers = 0);

}  // namespace stackelberg
