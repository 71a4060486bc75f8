#include <gtest/gtest.h>

#include <random>

#include "cookar/compositor.hpp"
#include "cookar/error.hpp"
#include "cookar/geometry.hpp"
#include "oracles.hpp"

using namespace cookar;
using testing_support::rect;

namespace {

RgbImage noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RgbImage img(w, h);
  for (auto& b : img.data()) b = static_cast<std::uint8_t>(rng() % 200);  // never an overlay color
  return img;
}

Bitmask changed(const RgbImage& a, const RgbImage& b) {
  Bitmask m(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (a.at(x, y) != b.at(x, y)) m.set(x, y);
  return m;
}

AffordanceInstance inst(int class_id, Role role, Polygon shape) { return {class_id, role, 1.0, std::move(shape)}; }

}  // namespace

TEST(Compositor, SolidGrabbableIsExactColor) {
  const RgbImage img = noise_image(80, 60, 1);
  const std::vector<AffordanceInstance> v{inst(1, Role::grabbable, rect(10, 10, 40, 30))};
  const RgbImage out = composite(img, v, style_preset("cookar-study"));
  const Bitmask mask = rasterize(v[0].shape, 80, 60);
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 80; ++x) {
      if (mask.at(x, y)) {
        EXPECT_EQ(out.at(x, y), (Rgb{0x3B, 0xE8, 0xB0}));
      } else {
        EXPECT_EQ(out.at(x, y), img.at(x, y));
      }
    }
  EXPECT_EQ(mask.count(), 600u);
}

TEST(Compositor, PreferredHazardIsOutlineOnly) {
  const RgbImage img = noise_image(80, 60, 2);
  const std::vector<AffordanceInstance> v{inst(0, Role::hazardous, rect(10, 10, 40, 30))};
  const RgbImage out = composite(img, v, style_preset("preferred"));
  const Bitmask ring = boundary(rasterize(v[0].shape, 80, 60), 3);
  EXPECT_EQ(changed(img, out), ring);
  // 30x20 square with a 3 px band: 600 - 24*14.
  EXPECT_EQ(ring.count(), 600u - 24u * 14u);
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 80; ++x)
      if (ring.at(x, y)) EXPECT_EQ(out.at(x, y), kHazardRed);
}

TEST(Compositor, AlphaZeroIsIdentity) {
  StyleSpec style = style_preset("cookar-study");
  for (auto& r : style.roles) {
    r.mode = OverlayMode::solid;
    r.alpha = 0.0;
  }
  const RgbImage img = noise_image(64, 48, 3);
  std::vector<AffordanceInstance> v;
  for (int i = 0; i < kRoleCount; ++i) v.push_back(inst(i, static_cast<Role>(i), rect(i * 5, i * 3, i * 5 + 20, i * 3 + 20)));
  EXPECT_EQ(composite(img, v, style), img);
}

TEST(Compositor, EmptyInstancesAndOffMode) {
  const RgbImage img = noise_image(32, 32, 4);
  EXPECT_EQ(composite(img, {}, style_preset("preferred")), img);
  const std::vector<AffordanceInstance> v{inst(3, Role::containment, rect(0, 0, 32, 32))};
  EXPECT_EQ(composite(img, v, style_preset("preferred")), img);
  EXPECT_NE(composite(img, v, style_preset("cookar-study")), img);
}

TEST(Compositor, BlendArithmetic) {
  EXPECT_EQ(blend({0, 0, 0}, {255, 255, 255}, 0.5), (Rgb{128, 128, 128}));
  EXPECT_EQ(blend({10, 20, 30}, {110, 120, 130}, 0.25), (Rgb{35, 45, 55}));
  EXPECT_EQ(blend({10, 20, 30}, {110, 120, 130}, 1.0), (Rgb{110, 120, 130}));
}

TEST(Compositor, LocalityAndPurityOverRandomScenes) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const RgbImage img = noise_image(96, 72, trial);
    std::vector<std::uint16_t> samples(96 * 72);
    for (auto& d : samples) d = static_cast<std::uint16_t>(rng() % 3000);
    const DepthMap depth(96, 72, std::move(samples));
    std::vector<AffordanceInstance> v;
    const int n = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      const double cx = static_cast<double>(rng() % 96);
      const double cy = static_cast<double>(rng() % 72);
      const auto shape = transform_polygon(testing_support::star(rng, cx, cy, 3, 25, 9), Affine::identity(), 96, 72);
      if (!shape) continue;
      v.push_back(inst(static_cast<int>(rng() % 18), static_cast<Role>(rng() % kRoleCount), *shape));
    }
    const StyleSpec style = style_preset(trial % 2 ? "preferred" : "cookar-study");
    const RgbImage out = composite(img, v, style, trial % 3 ? &depth : nullptr);
    EXPECT_EQ(out, composite(img, v, style, trial % 3 ? &depth : nullptr));
    Bitmask styled(96, 72);
    for (const auto& a : v) {
      const RoleStyle& rs = style[a.role];
      if (rs.mode == OverlayMode::off) continue;
      Bitmask m = rasterize(a.shape, 96, 72);
      if (rs.mode == OverlayMode::outline) m = boundary(m, rs.thickness);
      for (std::size_t i = 0; i < m.bits().size(); ++i) styled.bits()[i] |= m.bits()[i];
    }
    const Bitmask diff = changed(img, out);
    for (std::size_t i = 0; i < diff.bits().size(); ++i) {
      if (diff.bits()[i]) ASSERT_TRUE(styled.bits()[i]) << "trial " << trial;
    }
  }
}

TEST(Compositor, NearerInstanceOccludesFarther) {
  const RgbImage img(60, 40, Rgb{0, 0, 0});
  DepthMap depth(60, 40, 0);
  const Polygon a = rect(0, 0, 40, 40);
  const Polygon b = rect(20, 0, 60, 40);
  auto fill_depth = [&](int x0, int x1, std::uint16_t d) {
    for (int y = 0; y < 40; ++y)
      for (int x = x0; x < x1; ++x) depth.set(x, y, d);
  };
  const std::vector<AffordanceInstance> v{inst(0, Role::hazardous, a), inst(1, Role::grabbable, b)};
  const StyleSpec style = style_preset("cookar-study");

  fill_depth(0, 30, 800);   // a's median: near
  fill_depth(30, 60, 1500); // b's median: far
  EXPECT_EQ(composite(img, v, style, &depth).at(25, 10), kHazardRed);

  fill_depth(0, 30, 1500);
  fill_depth(30, 60, 800);
  EXPECT_EQ(composite(img, v, style, &depth).at(25, 10), kGrabbableGreen);

  // Equal depth and no depth: lower class id first, so the higher one ends on top.
  fill_depth(0, 60, 1000);
  EXPECT_EQ(composite(img, v, style, &depth).at(25, 10), kGrabbableGreen);
  EXPECT_EQ(composite(img, v, style).at(25, 10), kGrabbableGreen);
}

TEST(Compositor, MedianDepth) {
  Bitmask m(4, 1);
  DepthMap d(4, 1, std::vector<std::uint16_t>{0, 300, 100, 200});
  m.set(0, 0);
  EXPECT_FALSE(median_depth(m, d));
  m.set(1, 0);
  m.set(2, 0);
  m.set(3, 0);
  EXPECT_EQ(median_depth(m, d), 200);  // {100,200,300}
  m.set(3, 0, false);
  EXPECT_EQ(median_depth(m, d), 100);  // lower median of {100,300}
  EXPECT_THROW(median_depth(Bitmask(3, 1), d), InvalidArgument);
}

TEST(Disparity, PinholeExample) {
  // Pinhole: a point at Z projects to x = f*X/Z in each camera; the offset
  // between cameras separated by B metres is f*B/Z with Z in metres.
  const double f = 500, baseline = 0.063, z_m = 1.0;
  EXPECT_DOUBLE_EQ(f * baseline / z_m, 31.5);
  EXPECT_EQ(disparity_px(1000, f, baseline), 32);
  EXPECT_EQ(disparity_px(2000, f, baseline), 16);
  EXPECT_THROW(disparity_px(0, f, baseline), InvalidArgument);
  EXPECT_THROW(disparity_px(-5, f, baseline), InvalidArgument);
}

TEST(Disparity, MonotoneAndCapped) {
  int prev = disparity_px(1, 500, 0.063);
  for (double d = 2; d < 200000; d *= 1.07) {
    const int cur = disparity_px(d, 500, 0.063);
    EXPECT_GE(cur, 0);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
  EXPECT_EQ(disparity_px(1e9, 500, 0.063), disparity_px(kMaxDepthMm, 500, 0.063));
}

TEST(Disparity, LinearInBaselineBeforeRounding) {
  for (double d : {300.0, 777.0, 1000.0, 4321.0}) {
    const double raw = 500 * 0.063 * 1000 / d;
    EXPECT_EQ(disparity_px(d, 500, 0.063), static_cast<int>(std::lround(raw)));
    EXPECT_EQ(disparity_px(d, 500, 0.126), static_cast<int>(std::lround(2 * raw)));
  }
}

TEST(Compositor, RightViewShiftsByMedianDisparity) {
  const RgbImage right(120, 40, Rgb{0, 0, 0});
  const DepthMap depth(120, 40, 1000);
  const std::vector<AffordanceInstance> v{inst(1, Role::grabbable, rect(50, 10, 80, 30))};
  const StyleSpec style = style_preset("cookar-study");
  const RgbImage out = composite_right(right, v, style, depth, 500, 0.063);
  const Bitmask expect = rasterize(rect(18, 10, 48, 30), 120, 40);
  EXPECT_EQ(changed(right, out), expect);
  // No valid depth: capped at 65535 mm, 500*63/65535 rounds to 0.
  const RgbImage flat = composite_right(right, v, style, DepthMap(120, 40, 0), 500, 0.063);
  EXPECT_EQ(changed(right, flat), rasterize(v[0].shape, 120, 40));
}
