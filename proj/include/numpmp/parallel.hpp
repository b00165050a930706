#ifndef NUMPMP_PARALLEL_HPP_
#define NUMPMP_PARALLEL_HPP_

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace numpmp {

// Default data-parallel width: NUMPMP_THREADS if set, otherwise 1.
inline int default_threads() {
  if (const char* env = std::getenv("NUMPMP_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

// Runs fn(lo, hi) over a partition of [0, n). All ranges are disjoint, so
// elementwise writes need no synchronization. The partition depends on the
// thread count but never on scheduling.
template <class Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n < 4096) {
    fn(std::int64_t{0}, n);
    return;
  }
  int workers = threads;
  if (std::int64_t(workers) > n) workers = static_cast<int>(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    std::int64_t lo = n * w / workers;
    std::int64_t hi = n * (w + 1) / workers;
    pool.emplace_back([&, lo, hi, w] {
      try {
        fn(lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Chunk width for deterministic reductions. Partial sums are formed
// sequentially inside fixed 8192-wide chunks and combined in chunk order,
// so the result is independent of the thread count.
inline constexpr std::int64_t kReduceChunk = 8192;

template <class Term>
double deterministic_sum(std::int64_t n, int threads, Term&& term) {
  if (n <= 0) return 0.0;
  std::int64_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  parallel_for(chunks, threads, [&](std::int64_t clo, std::int64_t chi) {
    for (std::int64_t c = clo; c < chi; ++c) {
      std::int64_t lo = c * kReduceChunk;
      std::int64_t hi = lo + kReduceChunk < n ? lo + kReduceChunk : n;
      double acc = 0.0;
      for (std::int64_t i = lo; i < hi; ++i) acc += term(i);
      partial[static_cast<std::size_t>(c)] = acc;
    }
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace numpmp

#endif  // NUMPMP_PARALLEL_HPP_
