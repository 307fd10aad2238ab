#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace vsrag {

/// Runs fn(i) for i in [0, n) on at most `cap` threads. fn must not throw.
template <typename Fn>
void bounded_parallel_for(std::size_t n, std::size_t cap, Fn&& fn) {
  if (n == 0) return;
  const std::size_t workers = std::max<std::size_t>(1, std::min(cap, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
}

/// Virtual-time makespan of running `durations` in order on `slots` parallel workers,
/// each task going to the earliest-free worker. Equals the max when slots >= size.
double list_schedule_makespan(std::span<const double> durations, std::size_t slots);

}  // namespace vsrag
