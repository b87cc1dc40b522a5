#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace micropolar {

/// Worker count: MICROPOLAR_THREADS if set (>= 1), else hardware concurrency.
int worker_count();

/// Override the worker count for the current process (0 restores the default).
void set_worker_count(int n);

/// Runs body(lo, hi) over a static partition of [0, count). Bodies must touch
/// disjoint data; results never depend on the partition.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

/// Fixed-order reduction: the range is cut into chunks of a constant size that
/// does not depend on the worker count, partials are combined left to right.
template <typename T, typename ChunkFn, typename Combine>
T deterministic_reduce(std::size_t count, T init, ChunkFn chunk, Combine combine) {
  constexpr std::size_t kChunk = 1u << 14;
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<T> partial(nchunks, init);
  parallel_for(nchunks, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      const std::size_t b = c * kChunk;
      partial[c] = chunk(b, std::min(count, b + kChunk));
    }
  });
  T acc = init;
  for (const auto& p : partial) acc = combine(acc, p);
  return acc;
}

template <typename ChunkFn>
double deterministic_sum(std::size_t count, ChunkFn chunk) {
  return deterministic_reduce<double>(count, 0.0, chunk, [](double a, double b) { return a + b; });
}

template <typename ChunkFn>
double deterministic_max(std::size_t count, ChunkFn chunk) {
  return deterministic_reduce<double>(count, 0.0, chunk,
                                      [](double a, double b) { return std::max(a, b); });
}

}  // namespace micropolar
