#pragma once

#include <cstddef>
#include <cstdint>

namespace nestquant {

/// Caps the number of worker threads used by every parallel loop in the
/// library. Values < 1 restore the default (all available cores).
/// Results never depend on this setting: work is split into fixed chunks and
/// reductions run in chunk order.
void set_max_threads(int threads);
int max_threads();

// Static-schedule parallel loop over [0, n). The body must only write to
// per-index state.
template <typename Body>
void parallel_for(std::int64_t n, Body&& body) {
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (std::int64_t i = 0; i < n; ++i) {
    body(i);
  }
}

// Fixed chunking used by Monte Carlo routines. Chunk boundaries depend only
// on the total and the chunk size, never on the thread count.
struct ChunkPlan {
  std::size_t total = 0;
  std::size_t chunk = 0;

  std::size_t count() const { return chunk == 0 ? 0 : (total + chunk - 1) / chunk; }
  std::size_t begin(std::size_t c) const { return c * chunk; }
  std::size_t end(std::size_t c) const {
    const std::size_t e = (c + 1) * chunk;
    return e < total ? e : total;
  }
};

}  // namespace nestquant
