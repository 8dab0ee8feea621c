#include "fgd/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fgd {

namespace {

int env_jobs() {
  if (const char* env = std::getenv("FGD_JOBS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int> g_jobs{0}; // 0 = not overridden

} // namespace

int job_count() {
  const int n = g_jobs.load(std::memory_order_relaxed);
  return n >= 1 ? n : env_jobs();
}

void set_jobs(int n) { g_jobs.store(n < 1 ? 0 : n, std::memory_order_relaxed); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (begin >= end) return;
  const std::size_t total = end - begin;
  const std::size_t jobs = static_cast<std::size_t>(job_count());
  if (jobs <= 1 || total < 2 * jobs) {
    fn(begin, end);
    return;
  }
  const std::size_t chunk = (total + jobs - 1) / jobs;
  std::vector<std::thread> workers;
  workers.reserve(jobs - 1);
  std::size_t lo = begin + chunk;
  for (std::size_t j = 1; j < jobs && lo < end; ++j, lo += chunk) {
    workers.emplace_back(fn, lo, std::min(lo + chunk, end));
  }
  fn(begin, std::min(begin + chunk, end));
  for (auto& w : workers) w.join();
}

} // namespace fgd
