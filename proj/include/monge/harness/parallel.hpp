#pragma once

#include "monge/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace monge::harness {

/// Worker cap from MONGE_FORGE_THREADS, or nullopt when unset.
inline std::optional<int> env_thread_cap() {
  const char* v = std::getenv("MONGE_FORGE_THREADS");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  require(end != v && *end == '\0' && n >= 1, ErrorCode::kParse,
          "MONGE_FORGE_THREADS must be a positive integer, got '" + std::string(v) + "'");
  return static_cast<int>(std::min<long>(n, 1024));
}

/// Number of workers for `requested` independent jobs.
inline int worker_count(int requested) {
  int n = std::max(1, requested);
  if (const auto cap = env_thread_cap()) n = std::min(n, *cap);
  return n;
}

/// Runs task(0..count-1) on up to `workers` threads. The first exception is
/// rethrown after all workers finish.
inline void run_parallel(int count, int workers, const std::function<void(int)>& task) {
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto loop = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  workers = std::clamp(workers, 1, std::max(1, count));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace monge::harness
