#include "micropolar/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace micropolar {
namespace {

std::atomic<int> g_override{0};

int env_workers() {
  if (const char* env = std::getenv("MICROPOLAR_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int worker_count() {
  const int o = g_override.load();
  if (o > 0) return o;
  static const int n = env_workers();
  return n;
}

void set_worker_count(int n) { g_override.store(n > 0 ? n : 0); }

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
  if (workers <= 1 || count < 2048) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t step = (count + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = w * step;
    const std::size_t hi = std::min(count, lo + step);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  body(0, std::min(count, step));
  for (auto& t : pool) t.join();
}

}  // namespace micropolar
