#include "gax/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gax {

namespace {
std::atomic<int> g_threads{1};
}  // namespace

void set_num_threads(int threads) {
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  g_threads.store(threads);
}

int num_threads() { return g_threads.load(); }

void parallel_for(Index begin, Index end,
                  const std::function<void(Index, Index)>& body,
                  Index min_chunk) {
  const Index n = end - begin;
  if (n <= 0) return;
  const Index max_workers = std::max<Index>(1, n / std::max<Index>(1, min_chunk));
  const Index workers = std::min<Index>(num_threads(), max_workers);
  if (workers <= 1) {
    body(begin, end);
    return;
  }

  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const Index chunk = (n + workers - 1) / workers;
  for (Index w = 0; w < workers; ++w) {
    const Index lo = begin + w * chunk;
    const Index hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gax
