#ifndef TIDS_PARALLEL_HPP
#define TIDS_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace tids {

// process-wide worker count, set once by the CLI --threads flag
int worker_threads();
void set_worker_threads(int n);

// runs fn(i) for i in [0, n); results must be written by index so the
// outcome is independent of scheduling
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int workers = worker_threads();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::size_t spawn = static_cast<std::size_t>(workers) - 1;
  if (spawn > n - 1) spawn = n - 1;
  std::vector<std::thread> pool;
  pool.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
}

}  // namespace tids

#endif
