#include <gtest/gtest.h>

#include <set>

#include "cookar/compositor.hpp"
#include "cookar/error.hpp"
#include "cookar/geometry.hpp"
#include "cookar/oracle.hpp"
#include "cookar/replay.hpp"
#include "cookar/wire.hpp"
#include "oracles.hpp"

using namespace cookar;
using namespace std::chrono_literals;

TEST(Oracle, DeterministicPerSpec) {
  SceneSpec spec;
  spec.seed = 9;
  const Scene a = oracle_scene(spec);
  const Scene b = oracle_scene(spec);
  EXPECT_EQ(a.left, b.left);
  EXPECT_EQ(a.right, b.right);
  EXPECT_EQ(a.depth_mm, b.depth_mm);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  EXPECT_EQ(scene_ground_truth(spec), a.ground_truth);
  spec.seed = 10;
  EXPECT_NE(oracle_scene(spec).ground_truth, a.ground_truth);
}

TEST(Oracle, GroundTruthShape) {
  SceneSpec spec;
  for (std::uint64_t frame = 0; frame < 40; ++frame) {
    spec.tool_count = 1 + static_cast<int>(frame % 6);
    const auto gt = scene_ground_truth(spec.for_frame(frame));
    ASSERT_EQ(gt.size(), 2u * spec.tool_count);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const auto& inst = gt[i];
      EXPECT_EQ(inst.class_id % 2, static_cast<int>(i % 2));  // functional part, then handle
      EXPECT_EQ(inst.role, inst.class_id % 2 ? Role::grabbable : Role::hazardous);
      EXPECT_DOUBLE_EQ(inst.confidence, 1.0);
      EXPECT_GE(polygon_area(inst.shape), 16.0);
      for (const auto& ring : inst.shape.rings)
        for (const auto& p : ring) {
          EXPECT_EQ(p.x, std::round(p.x));
          EXPECT_GE(p.x, 0);
          EXPECT_LE(p.x, spec.width);
          EXPECT_LE(p.y, spec.height);
        }
    }
  }
}

TEST(Oracle, FramesDiffer) {
  SceneSpec spec;
  std::set<std::vector<double>> firsts;
  for (std::uint64_t f = 0; f < 10; ++f) {
    const auto gt = oracle_segment(f, spec);
    std::vector<double> key;
    for (const auto& p : gt[0].shape.rings[0]) key.push_back(p.x);
    firsts.insert(key);
  }
  EXPECT_GT(firsts.size(), 5u);
}

TEST(Oracle, ZeroJitterPredictionEqualsGroundTruth) {
  SceneSpec spec;
  for (std::uint64_t f = 0; f < 10; ++f) EXPECT_EQ(oracle_segment(f, spec), scene_ground_truth(spec.for_frame(f)));
}

TEST(Oracle, JitterIsBoundedAndDeterministic) {
  SceneSpec spec;
  spec.jitter = {6.0, 0.3};
  for (std::uint64_t f = 0; f < 10; ++f) {
    const auto pred = oracle_segment(f, spec);
    EXPECT_EQ(pred, oracle_segment(f, spec));
    const auto gt = scene_ground_truth(spec.for_frame(f));
    ASSERT_EQ(pred.size(), gt.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
      EXPECT_GE(pred[i].confidence, 0.3);
      EXPECT_LE(pred[i].confidence, 1.0);
      EXPECT_DOUBLE_EQ(pred[i].confidence * 10000, std::round(pred[i].confidence * 10000));
      // Unclipped polygons move rigidly by at most 6 px.
      const Bitmask a = rasterize(pred[i].shape, spec.width, spec.height);
      const Bitmask b = rasterize(gt[i].shape, spec.width, spec.height);
      EXPECT_GT(testing_support::count_and(a, b), 0u);
    }
  }
}

TEST(Oracle, SceneImagesAndDepth) {
  SceneSpec spec;
  spec.seed = 4;
  const Scene s = oracle_scene(spec);
  // Every ground-truth pixel not covered by a nearer tool has the tool's depth (< background).
  for (const auto& inst : s.ground_truth) {
    const Bitmask m = rasterize(inst.shape, spec.width, spec.height);
    const auto d = median_depth(m, s.depth_mm);
    ASSERT_TRUE(d);
    EXPECT_GE(*d, 500);
    EXPECT_LE(*d, 2500);
  }
  // Background pixels far from tools: right view is the left view shifted by the background disparity.
  const int shift = disparity_px(kBackgroundDepthMm, spec.rig.focal_px, spec.rig.baseline_m);
  EXPECT_EQ(shift, 11);
  Bitmask any(spec.width, spec.height);
  for (const auto& inst : s.ground_truth) {
    const Bitmask m = rasterize(inst.shape, spec.width, spec.height);
    for (std::size_t i = 0; i < m.bits().size(); ++i) any.bits()[i] |= m.bits()[i];
  }
  int checked = 0;
  for (int y = 0; y < spec.height; y += 7)
    for (int x = 0; x + shift + 80 < spec.width; x += 5) {
      bool clear = true;
      for (int dx = 0; dx <= shift + 80 && clear; ++dx) clear = !any.at(x + dx, y);
      if (!clear) continue;
      EXPECT_EQ(s.right.at(x, y), s.left.at(x + shift, y));
      ++checked;
    }
  EXPECT_GT(checked, 100);
}

TEST(Oracle, Validation) {
  SceneSpec spec;
  spec.tool_count = 0;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec.tool_count = 7;
  EXPECT_THROW(oracle_scene(spec), InvalidArgument);
  spec = SceneSpec{};
  spec.jitter.confidence_floor = 1.5;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec = SceneSpec{};
  spec.width = 8;
  spec.height = 8;
  EXPECT_THROW(scene_ground_truth(spec), Error);  // nothing fits
}

TEST(Oracle, SurvivesTheWireExactly) {
  SceneSpec spec;
  const auto gt = oracle_segment(3, spec);
  const auto back = wire::decode_result_payload(wire::encode_result_payload({3, 0, gt}));
  EXPECT_EQ(back.instances, gt);
}

namespace {
AnnotationSet replay_set() {
  AnnotationSet s = AnnotationSet::with_kitchen_categories();
  s.images = {{10, "a.png", 64, 48}, {11, "b.png", 64, 48}};
  s.annotations = {{2, 10, 1, testing_support::rect(0, 0, 5, 5), std::nullopt},
                   {1, 10, 0, testing_support::rect(10, 10, 20, 20), 0.3}};
  return s;
}
}  // namespace

TEST(Replay, ReturnsAnnotationsInIdOrder) {
  ReplayBackend backend(replay_set());
  FrameEnvelope f;
  f.frame_id = 10;
  const auto out = backend.segment(f);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].class_id, 0);
  EXPECT_DOUBLE_EQ(out[0].confidence, 0.3);
  EXPECT_EQ(out[1].role, Role::grabbable);
  f.frame_id = 11;
  EXPECT_TRUE(backend.segment(f).empty());
  f.frame_id = 999;
  EXPECT_TRUE(backend.segment(f).empty());
}

TEST(Replay, EmulatedLatency) {
  ReplayBackend backend(replay_set(), 20ms);
  FrameEnvelope f;
  f.frame_id = 10;
  const auto start = std::chrono::steady_clock::now();
  backend.segment(f);
  EXPECT_GE(std::chrono::steady_clock::now() - start, 20ms);
  EXPECT_EQ(kReplayDefaultLatency, 15950us);
}

TEST(Provider, ThresholdKeepsAtOrAbove) {
  std::vector<AffordanceInstance> v;
  for (double c : {0.1, 0.4, 0.39999, 0.95, 0.0, 1.0}) v.push_back({0, Role::hazardous, c, {}});
  const auto kept = apply_threshold(v, kDefaultConfidenceThreshold);
  ASSERT_EQ(kept.size(), 3u);
  EXPECT_DOUBLE_EQ(kept[0].confidence, 0.4);
  EXPECT_DOUBLE_EQ(kept[1].confidence, 0.95);
  EXPECT_DOUBLE_EQ(kDefaultConfidenceThreshold, 0.4);
}
