#include "anchor/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace anchor {

namespace {
int g_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void set_num_threads(int n) { g_threads = std::max(1, n); }
int num_threads() { return g_threads; }

void parallel_jobs(int64_t n_jobs, const std::function<void(int64_t)>& f) {
  if (n_jobs <= 0) return;
  const int workers = static_cast<int>(std::min<int64_t>(g_threads, n_jobs));
  if (workers <= 1) {
    for (int64_t j = 0; j < n_jobs; ++j) f(j);
    return;
  }
  std::atomic<int64_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto run = [&]() {
    for (;;) {
      const int64_t j = next.fetch_add(1, std::memory_order_relaxed);
      if (j >= n_jobs || failed.load(std::memory_order_relaxed)) return;
      try {
        f(j);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 0; t < workers - 1; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

void parallel_for(int64_t begin, int64_t end, int64_t grain,
                  const std::function<void(int64_t, int64_t)>& f) {
  if (end <= begin) return;
  grain = std::max<int64_t>(1, grain);
  const int64_t n_chunks = (end - begin + grain - 1) / grain;
  parallel_jobs(n_chunks, [&](int64_t c) {
    const int64_t lo = begin + c * grain;
    const int64_t hi = std::min(end, lo + grain);
    f(lo, hi);
  });
}

}  // namespace anchor
