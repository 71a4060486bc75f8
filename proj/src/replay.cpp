#include "cookar/replay.hpp"

#include "cookar/log.hpp"

namespace cookar {

std::vector<AffordanceInstance> replay_segment(std::uint64_t frame_id, const AnnotationSet& annotations,
                                               std::optional<std::chrono::microseconds> latency) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<AffordanceInstance> out;
  if (annotations.find_image(static_cast<std::int64_t>(frame_id)) == nullptr) {
    log().warn("replay: no image with id {}; returning no detections", frame_id);
  } else {
    out = instances_for(annotations, static_cast<std::int64_t>(frame_id));
  }
  if (latency) sleep_until_elapsed(start, *latency);
  return out;
}

ReplayBackend::ReplayBackend(AnnotationSet annotations, std::optional<std::chrono::microseconds> latency)
    : annotations_(std::move(annotations)), latency_(latency) {
  annotations_.validate();
}

}  // namespace cookar
