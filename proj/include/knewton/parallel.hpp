#pragma once

// Minimal fork-join helper for embarrassingly parallel trial batches. Each
// job writes into its own pre-assigned slot, so results are identical at any
// worker count; the first exception wins and is rethrown after the join.

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace knewton {

inline void run_jobs(const std::vector<std::function<void()>>& jobs,
                     int workers) {
  if (workers < 1) workers = 1;
  if (jobs.empty()) return;
  if (workers == 1) {
    for (const auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error) return;  // stop picking up work after a failure
      }
      try {
        jobs[i]();
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(jobs.size()));
  pool.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace knewton
