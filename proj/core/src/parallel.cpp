#include "tids/parallel.hpp"

namespace tids {

namespace {
std::atomic<int> g_workers{1};
}

int worker_threads() { return g_workers.load(); }

void set_worker_threads(int n) {
  if (n < 1) n = 1;
  g_workers.store(n);
}

}  // namespace tids
