#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace semreg {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on `workers`
/// threads. Falls back to a direct call for small inputs or one worker.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const int t = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (t == 1 || n < 64) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  const std::size_t chunk = (n + t - 1) / t;
  for (int w = 0; w < t; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e]() { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace semreg
