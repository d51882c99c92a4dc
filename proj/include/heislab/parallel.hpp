#pragma once

// Deterministic parallel loops and reductions.
//
// Work is cut into chunks whose boundaries depend only on the problem size,
// never on the number of workers. Each chunk produces one partial result
// stored at its chunk index, and the partials are combined by a fixed
// pairwise tree. Results are therefore bit-identical for any thread count.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace heis::parallel {

inline constexpr std::size_t kChunk = 2048;

/// Worker count used by all parallel loops. Defaults to HEISLAB_THREADS or 1.
unsigned threads();
void set_threads(unsigned n);

/// Runs body(chunk_index) for chunk_index in [0, n_chunks) on the pool.
void for_each_chunk(std::size_t n_chunks, const std::function<void(std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk = kChunk) { return (n + chunk - 1) / chunk; }

/// Pairwise (tree) summation in index order.
double pairwise_sum(std::span<const double> v);

/// sum_{i<n} term(i), computed chunk-wise with pairwise reduction.
template <class Term>
double sum(std::size_t n, Term&& term) {
  const std::size_t nc = chunk_count(n);
  std::vector<double> partial(nc, 0.0);
  for_each_chunk(nc, [&](std::size_t c) {
    const std::size_t b = c * kChunk;
    const std::size_t e = std::min(n, b + kChunk);
    double buf[kChunk];
    for (std::size_t i = b; i < e; ++i) buf[i - b] = term(i);
    partial[c] = pairwise_sum(std::span<const double>(buf, e - b));
  });
  return pairwise_sum(partial);
}

/// Plain parallel for over [0, n); body(i) must only write to slot i.
template <class Body>
void for_each(std::size_t n, Body&& body) {
  for_each_chunk(chunk_count(n), [&](std::size_t c) {
    const std::size_t b = c * kChunk;
    const std::size_t e = std::min(n, b + kChunk);
    for (std::size_t i = b; i < e; ++i) body(i);
  });
}

}  // namespace heis::parallel
