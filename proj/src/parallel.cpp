#include "tensorray/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "tensorray/common.hpp"

namespace tensorray {

namespace {
std::atomic<unsigned> g_workers{0};
}

double sphere_area(int d) {
  // 2 pi^{d/2} / Gamma(d/2)
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

void set_workers(unsigned n) { g_workers = n; }

unsigned workers() {
  unsigned w = g_workers;
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  return w;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t w = std::min<std::size_t>(workers(), count);
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t lo = count * t / w;
    const std::size_t hi = count * (t + 1) / w;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tensorray
