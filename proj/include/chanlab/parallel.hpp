#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace chanlab {

// Runs body(i) for i in [0, count) on `jobs` threads. Work items claim
// indices from a shared counter; callers write results into per-index slots
// so the outcome never depends on scheduling.
template <typename Body>
void parallel_for(std::int64_t count, int jobs, const Body& body) {
  if (jobs <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  int spawn = jobs < static_cast<int>(count) ? jobs : static_cast<int>(count);
  pool.reserve(spawn);
  for (int w = 0; w < spawn; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace chanlab
