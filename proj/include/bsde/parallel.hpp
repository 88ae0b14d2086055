#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace bsde {

// Thread-count knob shared by every parallel loop. Results never depend on
// it: work is split into fixed-size blocks and all reductions combine the
// per-block partials in block order.
inline unsigned& thread_count_ref() {
  static unsigned count = std::max(1u, std::thread::hardware_concurrency());
  return count;
}
inline void set_thread_count(unsigned k) { thread_count_ref() = std::max(1u, k); }
inline unsigned thread_count() { return thread_count_ref(); }

constexpr std::size_t kParallelBlock = 8192;

inline std::size_t block_count(std::size_t n) {
  return (n + kParallelBlock - 1) / kParallelBlock;
}

// Runs fn(block_index, begin, end) over [0, n) split into kParallelBlock
// chunks. Blocks are handed out dynamically but the mapping block -> range is
// fixed, so per-block outputs are scheduling-independent.
template <typename Fn>
void parallel_blocks(std::size_t n, Fn&& fn) {
  if (n == 0) return;
  const std::size_t nblocks = block_count(n);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(thread_count(), nblocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t lo = b * kParallelBlock;
      fn(b, lo, std::min(n, lo + kParallelBlock));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      const std::size_t lo = b * kParallelBlock;
      fn(b, lo, std::min(n, lo + kParallelBlock));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

// Deterministic sum of term(p) over p in [0, n): serial within each block,
// block partials combined in index order.
template <typename Term>
double parallel_sum(std::size_t n, Term&& term) {
  std::vector<double> partial(block_count(n), 0.0);
  parallel_blocks(n, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t p = lo; p < hi; ++p) s += term(p);
    partial[b] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace bsde
