#include "vsrag/fanout.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace vsrag {

double list_schedule_makespan(std::span<const double> durations, std::size_t slots) {
  if (durations.empty()) return 0.0;
  slots = std::max<std::size_t>(1, slots);
  std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
  for (std::size_t i = 0; i < std::min(slots, durations.size()); ++i) free_at.push(0.0);
  double makespan = 0.0;
  for (double d : durations) {
    const double start = free_at.top();
    free_at.pop();
    free_at.push(start + d);
    makespan = std::max(makespan, start + d);
  }
  return makespan;
}

}  // namespace vsrag
