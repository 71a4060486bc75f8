#pragma once

#include <chrono>
#include <optional>

#include "cookar/annotations.hpp"
#include "cookar/provider.hpp"

namespace cookar {

/// Emulated inference time when replay latency is switched on.
inline constexpr std::chrono::microseconds kReplayDefaultLatency{15950};

/// Annotations of image `frame_id` as instances, ascending annotation id.
/// Unknown frames yield an empty list (and a warning). With a latency model
/// the call takes at least that long.
std::vector<AffordanceInstance> replay_segment(std::uint64_t frame_id, const AnnotationSet& annotations,
                                               std::optional<std::chrono::microseconds> latency = std::nullopt);

class ReplayBackend final : public SegmentationProvider {
 public:
  explicit ReplayBackend(AnnotationSet annotations, std::optional<std::chrono::microseconds> latency = std::nullopt);
  std::vector<AffordanceInstance> segment(const FrameEnvelope& frame) override {
    return replay_segment(frame.frame_id, annotations_, latency_);
  }
  const AnnotationSet& annotations() const noexcept { return annotations_; }

 private:
  AnnotationSet annotations_;
  std::optional<std::chrono::microseconds> latency_;
};

}  // namespace cookar
