#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace modfault {

// Runs fn(i) for every i in [0, n) across `workers` threads in contiguous
// chunks. Each index writes only to its own output slot, so results are
// bit-identical for any worker count; callers merge in index order.
template <class F>
void parallel_for(std::uint64_t n, unsigned workers, F&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::uint64_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = static_cast<std::uint64_t>(w) * chunk;
    const std::uint64_t hi = lo + chunk < n ? lo + chunk : n;
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace modfault
