#pragma once

// Internal chunked-parallel helpers. Work is split into fixed-size chunks
// whose boundaries do not depend on the worker count, and reductions combine
// per-chunk partials in chunk order, so results are bit-identical for any
// number of threads.

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace gsieve::detail {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

/// Runs fn(chunk_index, lo, hi) over [0, n) in chunks of `chunk` elements.
template <class Fn>
void for_each_chunk(uint64_t n, uint64_t chunk, int workers, Fn&& fn) {
  if (n == 0) return;
  uint64_t nchunks = (n + chunk - 1) / chunk;
  workers = resolve_workers(workers);
  if (workers <= 1 || nchunks == 1) {
    for (uint64_t c = 0; c < nchunks; ++c)
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::atomic<uint64_t> next{0};
  auto body = [&] {
    for (;;) {
      uint64_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    }
  };
  std::vector<std::thread> pool;
  int nthreads = static_cast<int>(std::min<uint64_t>(workers, nchunks));
  pool.reserve(nthreads - 1);
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
}

/// Deterministic sum of fn(i) over [0, n): per-chunk partials combined in
/// chunk order.
template <class Fn>
double chunked_sum(uint64_t n, uint64_t chunk, int workers, Fn&& fn) {
  if (n == 0) return 0.0;
  uint64_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(nchunks, 0.0);
  for_each_chunk(n, chunk, workers, [&](uint64_t c, uint64_t lo, uint64_t hi) {
    double s = 0.0;
    for (uint64_t i = lo; i < hi; ++i) s += fn(i);
    partial[c] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

inline constexpr uint64_t kChunk = 1 << 16;

}  // namespace gsieve::detail
