#pragma once

#include <chrono>
#include <memory>
#include <thread>
#include <vector>

#include "cookar/types.hpp"

namespace cookar {

inline constexpr double kDefaultConfidenceThreshold = 0.4;

/// A segmentation backend. Implementations that cannot take concurrent calls
/// return false from concurrent_safe(); callers then serialize.
class SegmentationProvider {
 public:
  virtual ~SegmentationProvider() = default;
  virtual std::vector<AffordanceInstance> segment(const FrameEnvelope& frame) = 0;
  virtual bool concurrent_safe() const noexcept { return true; }
};

/// Keeps instances with confidence >= threshold, preserving order.
std::vector<AffordanceInstance> apply_threshold(std::vector<AffordanceInstance> instances, double threshold);

/// Sleeps until `duration` after `start` (absolute deadline, so repeated
/// calls do not accumulate drift).
void sleep_until_elapsed(std::chrono::steady_clock::time_point start, std::chrono::microseconds duration);

/// Adds a fixed emulated inference time to another provider.
class DelayedProvider final : public SegmentationProvider {
 public:
  DelayedProvider(std::shared_ptr<SegmentationProvider> inner, std::chrono::microseconds delay)
      : inner_(std::move(inner)), delay_(delay) {}
  std::vector<AffordanceInstance> segment(const FrameEnvelope& frame) override {
    const auto start = std::chrono::steady_clock::now();
    auto out = inner_->segment(frame);
    sleep_until_elapsed(start, delay_);
    return out;
  }
  bool concurrent_safe() const noexcept override { return inner_->concurrent_safe(); }

 private:
  std::shared_ptr<SegmentationProvider> inner_;
  std::chrono::microseconds delay_;
};

}  // namespace cookar
