#include "cmmd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cmmd {

void parallel_for(Eigen::Index count, int threads,
                  const std::function<void(Eigen::Index)>& body) {
  if (count <= 0) return;
  if (threads > count) threads = static_cast<int>(count);
  if (threads <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run_chunk = [&](Eigen::Index begin, Eigen::Index end) {
    try {
      for (Eigen::Index i = begin; i < end && !failed.load(std::memory_order_relaxed); ++i)
        body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
      failed.store(true, std::memory_order_relaxed);
    }
  };

  const Eigen::Index chunk = (count + threads - 1) / threads;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads) - 1);
  for (int t = 1; t < threads; ++t) {
    const Eigen::Index begin = t * chunk;
    if (begin >= count) break;
    workers.emplace_back(run_chunk, begin, std::min(count, begin + chunk));
  }
  run_chunk(0, std::min(count, chunk));
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cmmd
