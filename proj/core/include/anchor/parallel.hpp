#pragma once

#include <cstdint>
#include <functional>

namespace anchor {

// Process-wide worker count. Results never depend on it: every parallel
// region below decomposes work into chunks whose boundaries are fixed by the
// problem size alone, and any reduction combines chunk results in chunk order.
void set_num_threads(int n);
int num_threads();

// Runs f(chunk_begin, chunk_end) over [begin, end) split into fixed-size
// chunks of `grain`. Chunks may run on any thread; f must only write to
// chunk-local or per-index state.
void parallel_for(int64_t begin, int64_t end, int64_t grain,
                  const std::function<void(int64_t, int64_t)>& f);

// Runs f(job) for job in [0, n_jobs). Each job owns its output slot.
void parallel_jobs(int64_t n_jobs, const std::function<void(int64_t)>& f);

}  // namespace anchor
