#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dynsub {

// f(0..count-1) on a small thread pool. Callers write results by index, so
// output order never depends on scheduling. The first exception is rethrown.
template <class F>
void parallel_for(int count, int workers, F f) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(1, count));
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto body = [&] {
    for (int k; (k = next.fetch_add(1)) < count;) {
      try {
        f(k);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace dynsub
