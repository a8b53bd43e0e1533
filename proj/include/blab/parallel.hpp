#pragma once

#include <functional>

namespace blab {

// Worker count from BLAB_WORKERS, else the hardware concurrency.
int worker_count();

// Runs body(0..n-1) on up to `workers` threads. Each index is visited once;
// callers write results by index, so output order never depends on timing.
// The first exception thrown by any body is rethrown here.
void parallel_for(int n, const std::function<void(int)>& body, int workers = worker_count());

}  // namespace blab
