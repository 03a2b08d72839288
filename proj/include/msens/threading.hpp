#pragma once

#include <functional>

namespace msens {

// Worker count = min(hardware threads, MSM_THREADS when set, task count).
int worker_count(int task_count);

// Runs fn(0..n-1) across workers. Tasks must be independent; any task may
// throw and the first exception is rethrown on the calling thread. Results
// must be written to task-indexed slots so output is schedule-independent.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace msens
