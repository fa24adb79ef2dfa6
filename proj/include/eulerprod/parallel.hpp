#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace eulerprod {

/// Worker count used by the parallel loops below; 0 means "hardware".
int default_threads();
void set_default_threads(int n);

/// Runs f(i) for i in [0, n). Work is split into contiguous chunks, one per
/// worker. Callers must only write to per-index slots, so any schedule
/// produces identical results.
template <class F>
void parallel_for(int64_t n, F&& f, int threads = 0) {
  if (n <= 0) return;
  int nt = threads > 0 ? threads : default_threads();
  if (nt > n) nt = static_cast<int>(n);
  if (nt <= 1) {
    for (int64_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  int64_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    int64_t lo = t * chunk;
    int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (int64_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace eulerprod
