// OpenMP execution helpers with a serial reference path.
//
// Reductions are blocked with a fixed block size, partial sums are combined
// in index order, so serial and parallel runs produce bit-identical results
// for any thread count.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "curvlab/types.hpp"

namespace curvlab {

enum class exec { serial, parallel };

// Process-wide default, switchable by the CLI (--serial) and the benchmark.
inline exec& default_exec() {
  static exec e = exec::parallel;
  return e;
}

inline constexpr std::size_t kReduceBlock = 2048;

// Exceptions cannot unwind an OpenMP region; the first one (in index
// order) is captured and rethrown after the join.
template <class F>
void parallel_for(std::size_t n, exec ex, F&& body) {
  if (ex == exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first;
  std::size_t first_index = n;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)n; ++i) {
    try {
      body((std::size_t)i);
    } catch (...) {
#pragma omp critical
      {
        if ((std::size_t)i < first_index) {
          first_index = (std::size_t)i;
          first = std::current_exception();
        }
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

// Deterministic map-reduce: `term(i)` summed over i in [0, n). Terms are
// accumulated serially inside fixed blocks; block sums combine pairwise in
// block order.
template <class T, class Term>
T parallel_sum(std::size_t n, exec ex, Term&& term) {
  if (n == 0) return T{};
  std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<T> partial(nblocks);
  parallel_for(nblocks, ex, [&](std::size_t b) {
    std::size_t lo = b * kReduceBlock;
    std::size_t hi = std::min(n, lo + kReduceBlock);
    T acc = term(lo);
    for (std::size_t i = lo + 1; i < hi; ++i) acc += term(i);
    partial[b] = acc;
  });
  return pairwise_sum(std::span<const T>(partial));
}

}  // namespace curvlab
