#include "cookar/provider.hpp"

#include <algorithm>

namespace cookar {

std::vector<AffordanceInstance> apply_threshold(std::vector<AffordanceInstance> instances, double threshold) {
  std::erase_if(instances, [threshold](const AffordanceInstance& i) { return !(i.confidence >= threshold); });
  return instances;
}

void sleep_until_elapsed(std::chrono::steady_clock::time_point start, std::chrono::microseconds duration) {
  if (duration.count() <= 0) return;
  std::this_thread::sleep_until(start + duration);
}

}  // namespace cookar
