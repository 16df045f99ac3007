#pragma once

#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace helfrich {

// Process-global worker count. 0 = hardware concurrency. The CLI sets this
// once from --threads; results never depend on it (see parallel_for).
void set_num_threads(int n);
int num_threads();

// Runs f(i) for i in [0, n), split into contiguous chunks over the worker
// threads. f must only write state owned by index i; every reduction over the
// results happens sequentially afterwards, so output is bitwise independent
// of the thread count. The first exception thrown by a worker is rethrown.
template <class F>
void parallel_for(std::int64_t n, F&& f) {
  const int workers = num_threads();
  if (workers <= 1 || n < 256) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
    return;
  }
  const int t = static_cast<int>(std::min<std::int64_t>(workers, n));
  std::vector<std::exception_ptr> errors(t);
  std::vector<std::thread> pool;
  pool.reserve(t - 1);
  auto chunk = [&](int w) {
    const std::int64_t lo = n * w / t, hi = n * (w + 1) / t;
    try {
      for (std::int64_t i = lo; i < hi; ++i) f(i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  for (int w = 1; w < t; ++w) pool.emplace_back(chunk, w);
  chunk(0);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace helfrich
