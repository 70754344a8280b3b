#pragma once

#include <cstddef>
#include <functional>

namespace fdlab {

// Worker count from FDLAB_WORKERS, else the hardware concurrency (>= 1).
int worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
// writes only its own result slot, so the outcome does not depend on the
// schedule. The first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fdlab
