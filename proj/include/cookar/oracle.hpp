#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cookar/provider.hpp"
#include "cookar/types.hpp"

namespace cookar {

struct StereoRig {
  double focal_px = 500.0;
  double baseline_m = 0.063;
};

struct SceneJitter {
  double translate_px = 0.0;       ///< max offset magnitude of predicted polygons
  double confidence_floor = 1.0;   ///< predicted confidences are drawn in [floor, 1]
};

/// Parameters of a synthetic kitchen scene. A frame sequence uses
/// for_frame(id) so every frame has its own reproducible layout.
struct SceneSpec {
  std::uint64_t seed = 1;
  int tool_count = 3;  ///< 1..6
  int width = 640;
  int height = 480;
  SceneJitter jitter;
  StereoRig rig;
  std::optional<std::uint16_t> fixed_depth_mm;  ///< forces every pixel to one depth

  /// Throws InvalidArgument.
  void validate() const;
  SceneSpec for_frame(std::uint64_t frame_id) const;
};

inline constexpr std::uint16_t kBackgroundDepthMm = 3000;

struct Scene {
  RgbImage left;
  RgbImage right;
  DepthMap depth_mm;
  /// Two parts per tool (functional part, then handle), confidence 1.0,
  /// integer vertices clipped to the canvas.
  std::vector<AffordanceInstance> ground_truth;
};

/// Layout only (no pixels); identical to oracle_scene(spec).ground_truth.
std::vector<AffordanceInstance> scene_ground_truth(const SceneSpec& spec);

/// Renders the scene. Tools that would land fully outside the canvas are
/// re-sampled up to 100 times, then Error.
Scene oracle_scene(const SceneSpec& spec);

/// Ground truth of spec.for_frame(frame_id) with each polygon shifted by a
/// seeded integer offset of magnitude <= translate_px and confidence drawn in
/// [confidence_floor, 1] (quantized to 1e-4). Deterministic per (seed, frame_id).
std::vector<AffordanceInstance> oracle_segment(std::uint64_t frame_id, const SceneSpec& spec);

class OracleBackend final : public SegmentationProvider {
 public:
  explicit OracleBackend(SceneSpec spec);
  std::vector<AffordanceInstance> segment(const FrameEnvelope& frame) override {
    return oracle_segment(frame.frame_id, spec_);
  }
  const SceneSpec& spec() const noexcept { return spec_; }

 private:
  SceneSpec spec_;
};

}  // namespace cookar
