#pragma once

#include <functional>

namespace sgk {

// Global cap on worker threads (0 = hardware concurrency). Used by the CLI
// --threads flag; reads and writes are atomic.
void set_max_threads(int threads);
int max_threads();

// Runs body(0..n-1) on up to max_threads() workers. Work items must be
// independent; the first exception thrown by any item is rethrown after all
// workers join. Callers that need deterministic aggregation should write into
// per-index slots and reduce sequentially afterwards.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace sgk
