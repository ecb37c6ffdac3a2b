#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cartan {

// CARTAN_LAB_THREADS caps the worker count; results must be written by index
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* e = std::getenv("CARTAN_LAB_THREADS")) {
    long v = std::strtol(e, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, unsigned(v));
  }
  return n;
}

template <class F> void parallel_for(std::size_t count, F&& f) {
  unsigned nt = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace cartan
