#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <set>

#include "cookar/dataset.hpp"
#include "cookar/error.hpp"
#include "cookar/geometry.hpp"
#include "cookar/image_io.hpp"
#include "cookar/image_ops.hpp"
#include "cookar/oracle.hpp"
#include "oracles.hpp"

using namespace cookar;
using testing_support::rect;

namespace {

RgbImage textured(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto v = static_cast<std::uint8_t>((x * 3 + y * 5 + static_cast<int>(rng() % 40)) % 256);
      img.set(x, y, {v, static_cast<std::uint8_t>(255 - v), static_cast<std::uint8_t>(v / 2)});
    }
  return img;
}

/// Mask warped by nearest neighbour: each output pixel centre pulled back
/// through the inverse map and sampled from the source mask.
Bitmask nn_warp(const Bitmask& src, const Affine& forward, int w, int h) {
  const Affine inv = forward.inverse();
  Bitmask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Point p = inv.apply({x + 0.5, y + 0.5});
      const int sx = static_cast<int>(std::floor(p.x));
      const int sy = static_cast<int>(std::floor(p.y));
      if (sx >= 0 && sy >= 0 && sx < src.width() && sy < src.height() && src.at(sx, sy)) out.set(x, y);
    }
  return out;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Filter, AlwaysTrueSkipsTwenty) {
  std::vector<std::int64_t> ids(100);
  std::iota(ids.begin(), ids.end(), 0);
  EXPECT_EQ(filter_frames(ids, [](std::int64_t) { return true; }), (std::vector<std::int64_t>{0, 21, 42, 63, 84}));
  EXPECT_TRUE(filter_frames(ids, [](std::int64_t) { return false; }).empty());
  EXPECT_EQ(filter_frames(ids, [](std::int64_t) { return true; }, 0).size(), 100u);
}

TEST(Filter, AnnotatedFramesProperty) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    AnnotationSet set = AnnotationSet::with_kitchen_categories();
    std::set<std::int64_t> annotated;
    std::int64_t ann = 1;
    for (std::int64_t id = 0; id < 200; ++id) {
      set.images.push_back({id, "f.png", 64, 64});
      if (rng() % 4 == 0) {
        annotated.insert(id);
        set.annotations.push_back({ann++, id, 0, rect(0, 0, 5, 5), std::nullopt});
      }
    }
    std::shuffle(set.images.begin(), set.images.end(), rng);
    const auto kept = filter_annotated(set);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      EXPECT_TRUE(annotated.count(kept[i]));
      if (i > 0) EXPECT_GE(kept[i] - kept[i - 1], 21);
    }
    // Nothing annotated is missed outside a skip window.
    for (std::int64_t id : annotated) {
      const auto after = std::upper_bound(kept.begin(), kept.end(), id);
      const bool covered = after != kept.begin() && id - *std::prev(after) <= 20;
      EXPECT_TRUE(covered) << id;
    }
  }
}

TEST(Augment, SampledValuesInRangeAndDeterministic) {
  const AugmentRanges r;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    SplitMix64 a(seed), b(seed);
    const AugmentSample s = sample_augment(r, a);
    const AugmentSample t = sample_augment(r, b);
    EXPECT_EQ(s.zoom, t.zoom);
    EXPECT_EQ(s.rotation_deg, t.rotation_deg);
    EXPECT_EQ(s.noise_fraction, t.noise_fraction);
    EXPECT_GE(s.zoom, 0.0);
    EXPECT_LE(s.zoom, 0.40);
    EXPECT_GE(s.rotation_deg, -15.0);
    EXPECT_LE(s.rotation_deg, 15.0);
    EXPECT_GE(s.brightness, -0.15);
    EXPECT_LE(s.brightness, 0.15);
    EXPECT_GE(s.blur_sigma, 0.0);
    EXPECT_LE(s.blur_sigma, 2.5);
    EXPECT_GE(s.noise_fraction, 0.0);
    EXPECT_LE(s.noise_fraction, 0.001);
    EXPECT_GE(s.crop_u, 0.0);
    EXPECT_LE(s.crop_u, 1.0);
  }
  AugmentRanges bad;
  bad.max_zoom = 1.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = AugmentRanges{};
  bad.max_blur_sigma = -1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Augment, ZeroRangesAreIdentity) {
  const RgbImage img = textured(96, 64, 1);
  const std::vector<Annotation> anns{{1, 1, 2, rect(3.25, 4.5, 40, 30), std::nullopt},
                                     {2, 1, 3, rect(50, 10, 90, 60), 0.7}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitMix64 rng(seed);
    const Augmented out = augment(img, anns, AugmentRanges::none(), rng);
    EXPECT_EQ(out.image, img);
    EXPECT_EQ(out.annotations.size(), anns.size());
    for (std::size_t i = 0; i < anns.size(); ++i) {
      EXPECT_EQ(out.annotations[i].shape, anns[i].shape);
      EXPECT_EQ(out.annotations[i].score, anns[i].score);
    }
  }
}

TEST(Augment, BrightnessArithmetic) {
  const RgbImage img(8, 8, Rgb{100, 100, 100});
  AugmentSample s;
  s.brightness = 0.15;
  SplitMix64 rng(1);
  const Augmented out = apply_augment(img, {}, s, rng);
  EXPECT_EQ(out.image, RgbImage(8, 8, Rgb{115, 115, 115}));
  s.brightness = -0.15;
  EXPECT_EQ(apply_augment(img, {}, s, rng).image, RgbImage(8, 8, Rgb{85, 85, 85}));
  EXPECT_EQ(adjust_brightness(RgbImage(1, 1, Rgb{250, 0, 3}), 0.15).at(0, 0), (Rgb{255, 0, 3}));
}

TEST(Augment, CropTransformArithmetic) {
  AugmentSample s;
  s.zoom = 0.5;  // window 50x40 of a 100x80 image at the origin, scaled by 2
  Affine t = augment_transform(s, 100, 80);
  EXPECT_NEAR(t.apply({10, 20}).x, 20, 1e-9);
  EXPECT_NEAR(t.apply({10, 20}).y, 40, 1e-9);
  s.crop_u = 1.0;  // window at the right edge: x0 = 50
  t = augment_transform(s, 100, 80);
  EXPECT_NEAR(t.apply({60, 0}).x, 20, 1e-9);
}

TEST(Augment, NoiseTouchesRequestedFraction) {
  RgbImage img(200, 100, Rgb{128, 128, 128});
  SplitMix64 rng(3);
  salt_and_pepper(img, 0.001, rng);
  int changed = 0;
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 200; ++x)
      if (img.at(x, y) != Rgb{128, 128, 128}) ++changed;
  EXPECT_GT(changed, 0);
  EXPECT_LE(changed, 20);
}

TEST(Augment, AnnotationsFollowTheImageWarp) {
  // Compact instances at the scale of the core warp check: a rotated square
  // of side 160-220 px near the centre of a 640x480 frame.
  constexpr int W = 640, H = 480;
  std::mt19937_64 shapes(99);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    std::uniform_real_distribution<double> side(160, 220), jitter(-20, 20), angle(0, 90);
    const double half = side(shapes) / 2;
    const Affine pose = Affine::rotation_about(angle(shapes), W / 2.0, H / 2.0);
    Ring ring;
    for (const Point& p : {Point{-half, -half}, Point{half, -half}, Point{half, half}, Point{-half, half}})
      ring.push_back(pose.apply({W / 2.0 + p.x + jitter(shapes), H / 2.0 + p.y + jitter(shapes)}));
    const std::vector<Annotation> anns{{1, 1, 0, Polygon{{ring}}, std::nullopt}};
    const AugmentRanges ranges = seed % 2 ? AugmentRanges::rotation_only() : AugmentRanges{0.40, 15, 0, 0, 0};
    SplitMix64 rng(seed);
    const Augmented out = augment(RgbImage(W, H), anns, ranges, rng);
    const Affine t = augment_transform(out.sample, W, H);
    for (const auto& a : out.annotations) {
      const Bitmask warped = nn_warp(testing_support::pnpoly_mask(anns[0].shape, W, H), t, W, H);
      EXPECT_GE(testing_support::iou(rasterize(a.shape, W, H), warped), 0.98) << "seed " << seed;
      ++checked;
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(Augment, WarpDisagreementStaysOnTheEdge) {
  // Thin tool parts: nearest-neighbour sampling moves each sample by at most
  // half a pixel per axis in the source, so a pixel where the two masks differ
  // lies within sqrt(2)/2 source pixels (times the zoom scale) of the edge.
  constexpr int W = 640, H = 480;
  std::size_t disagreements = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SceneSpec spec;
    spec.seed = 1000 + seed;
    const auto gt = scene_ground_truth(spec);
    std::vector<Annotation> anns;
    for (std::size_t i = 0; i < gt.size(); ++i)
      anns.push_back({static_cast<std::int64_t>(i + 1), 1, gt[i].class_id, gt[i].shape, std::nullopt});
    SplitMix64 rng(seed);
    const Augmented out = augment(RgbImage(W, H), anns, AugmentRanges{0.40, 15, 0, 0, 0}, rng);
    const Affine t = augment_transform(out.sample, W, H);
    const double reach = std::sqrt(0.5) / (1.0 - out.sample.zoom) + 1e-9;
    for (const auto& a : out.annotations) {
      const Polygon& orig = anns[static_cast<std::size_t>(a.id - 1)].shape;
      std::vector<std::pair<Point, Point>> edges;
      for (const Ring& r : orig.rings)
        for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) edges.emplace_back(t.apply(r[j]), t.apply(r[i]));
      const Bitmask mine = rasterize(a.shape, W, H);
      const Bitmask warped = nn_warp(testing_support::pnpoly_mask(orig, W, H), t, W, H);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          if (mine.at(x, y) == warped.at(x, y)) continue;
          ++disagreements;
          double best = 1e300;
          for (const auto& [u, v] : edges) {
            const double dx = v.x - u.x, dy = v.y - u.y;
            const double len2 = dx * dx + dy * dy;
            const double s = std::clamp(((x + 0.5 - u.x) * dx + (y + 0.5 - u.y) * dy) / len2, 0.0, 1.0);
            best = std::min(best, std::hypot(u.x + s * dx - (x + 0.5), u.y + s * dy - (y + 0.5)));
          }
          ASSERT_LE(best, reach) << "seed " << seed << " ann " << a.id << " at " << x << "," << y;
        }
    }
  }
  EXPECT_GT(disagreements, 0u);
}

TEST(Augment, ImageWarpMatchesPolygonWarp) {
  // A white square on black: after augmentation the bright pixels sit where the polygon went.
  constexpr int W = 320, H = 240;
  RgbImage img(W, H, Rgb{0, 0, 0});
  const Polygon square = rect(100, 60, 220, 180);
  const Bitmask m = rasterize(square, W, H);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      if (m.at(x, y)) img.set(x, y, {255, 255, 255});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitMix64 rng(seed);
    const Augmented out = augment(img, std::vector<Annotation>{{1, 1, 0, square, std::nullopt}},
                                  AugmentRanges{0.40, 15, 0, 0, 0}, rng);
    ASSERT_EQ(out.annotations.size(), 1u);
    Bitmask bright(W, H);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        if (out.image.at(x, y).r >= 128) bright.set(x, y);
    EXPECT_GE(testing_support::iou(bright, rasterize(out.annotations[0].shape, W, H)), 0.98) << seed;
  }
}

TEST(Augment, TinyRemnantsAreDropped) {
  AugmentSample s;
  s.zoom = 0.4;  // crop at the origin: a polygon at the far corner leaves the frame
  const std::vector<Annotation> anns{{1, 1, 0, rect(95, 75, 99, 79), std::nullopt},
                                     {2, 1, 0, rect(10, 10, 40, 40), std::nullopt}};
  SplitMix64 rng(0);
  const Augmented out = apply_augment(RgbImage(100, 80), anns, s, rng);
  ASSERT_EQ(out.annotations.size(), 1u);
  EXPECT_EQ(out.annotations[0].id, 2);
}

TEST(Normalize, ExactHalving) {
  const std::vector<Annotation> anns{{1, 1, 0, rect(10, 20, 300, 401), std::nullopt},
                                     {2, 1, 1, Polygon{{{{0, 0}, {1279, 3}, {640, 959}}}}, std::nullopt}};
  const Resized r = normalize_resolution(textured(1280, 960, 2), anns);
  EXPECT_EQ(r.image.width(), 640);
  EXPECT_EQ(r.image.height(), 480);
  for (std::size_t i = 0; i < anns.size(); ++i)
    for (std::size_t k = 0; k < anns[i].shape.rings[0].size(); ++k) {
      EXPECT_EQ(r.annotations[i].shape.rings[0][k].x, anns[i].shape.rings[0][k].x / 2);
      EXPECT_EQ(r.annotations[i].shape.rings[0][k].y, anns[i].shape.rings[0][k].y / 2);
    }
}

TEST(Normalize, AlreadyTargetIsIdentity) {
  const RgbImage img = textured(640, 480, 3);
  const std::vector<Annotation> anns{{1, 1, 0, rect(10.5, 20, 300, 401), std::nullopt}};
  const Resized r = normalize_resolution(img, anns);
  EXPECT_EQ(r.image, img);
  EXPECT_EQ(r.annotations[0].shape, anns[0].shape);
}

TEST(Normalize, AreaScalesWithResolution) {
  std::mt19937_64 rng(4);
  for (const auto& [w, h] : std::vector<std::pair<int, int>>{{1280, 720}, {800, 600}, {320, 240}, {1000, 1000}}) {
    std::vector<Annotation> anns;
    for (int i = 0; i < 5; ++i)
      anns.push_back({i, 1, 0, testing_support::star(rng, w * (0.2 + 0.15 * i), h * 0.5, 0.08 * std::min(w, h),
                                                     0.2 * std::min(w, h), 9),
                      std::nullopt});
    const Resized r = normalize_resolution(RgbImage(w, h), anns);
    const double ratio = (640.0 * 480.0) / (static_cast<double>(w) * h);
    for (std::size_t i = 0; i < anns.size(); ++i) {
      const double before = static_cast<double>(testing_support::pnpoly_mask(anns[i].shape, w, h).count());
      const double after = static_cast<double>(rasterize(r.annotations[i].shape, 640, 480).count());
      EXPECT_NEAR(after, before * ratio, 0.05 * before * ratio) << w << "x" << h;
    }
  }
}

TEST(Split, PublishedRatios) {
  EXPECT_EQ(split_sizes(100, {0.82, 0.12, 0.06}), (std::array<std::size_t, 3>{82, 12, 6}));
  EXPECT_EQ(split_sizes(10152, {0.82, 0.12, 0.06}), (std::array<std::size_t, 3>{8325, 1218, 609}));
  // Largest remainder by hand: 10 * (0.5, 0.25, 0.25) = 5, 2.5, 2.5 -> the earlier 0.5 wins.
  EXPECT_EQ(split_sizes(10, {0.5, 0.25, 0.25}), (std::array<std::size_t, 3>{5, 3, 2}));
  for (std::size_t n = 3; n < 500; ++n) {
    const auto s = split_sizes(n, {0.82, 0.12, 0.06});
    EXPECT_EQ(s[0] + s[1] + s[2], n);
    for (std::size_t k = 0; k < 3; ++k) {
      const double exact = static_cast<double>(n) * std::array<double, 3>{0.82, 0.12, 0.06}[k];
      EXPECT_LT(std::abs(static_cast<double>(s[k]) - exact), 1.0);
    }
  }
}

TEST(Split, DeterministicPartition) {
  std::vector<std::int64_t> ids(100);
  std::iota(ids.begin(), ids.end(), 1000);
  std::vector<std::int64_t> shuffled = ids;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
  const SplitResult a = split(ids, {{0.82, 0.12, 0.06}, 7});
  const SplitResult b = split(shuffled, {{0.82, 0.12, 0.06}, 7});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size(), 82u);
  EXPECT_EQ(a.val.size(), 12u);
  EXPECT_EQ(a.test.size(), 6u);
  std::set<std::int64_t> all(a.train.begin(), a.train.end());
  all.insert(a.val.begin(), a.val.end());
  all.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(all, std::set<std::int64_t>(ids.begin(), ids.end()));
  const SplitResult c = split(ids, {{0.82, 0.12, 0.06}, 8});
  EXPECT_EQ(c.train.size(), 82u);
  EXPECT_NE(c.train, a.train);
  EXPECT_EQ(split_manifest(a, 7), split_manifest(b, 7));
  EXPECT_EQ(split_manifest(a, 7)["seed"], 7);
}

TEST(Split, Errors) {
  EXPECT_THROW(split(std::vector<std::int64_t>{1, 2}, SplitSpec{}), InvalidArgument);
  EXPECT_THROW(split(std::vector<std::int64_t>{1, 2, 2, 3}, SplitSpec{}), InvalidArgument);
  EXPECT_THROW((SplitSpec{{0.5, 0.5, 0.5}, 0}.validate()), InvalidArgument);
  EXPECT_THROW((SplitSpec{{1.2, -0.1, -0.1}, 0}.validate()), InvalidArgument);
}

TEST(DatasetFiles, AugmentIsByteIdenticalAcrossRuns) {
  const auto dir = testing_support::temp_dir("dataset_aug");
  AnnotationSet set = AnnotationSet::with_kitchen_categories();
  std::mt19937_64 rng(5);
  for (std::int64_t id = 1; id <= 4; ++id) {
    const std::string name = "img" + std::to_string(id) + ".png";
    write_png(textured(160, 120, static_cast<std::uint64_t>(id)), dir / name);
    set.images.push_back({id, name, 160, 120});
    set.annotations.push_back({id, id, static_cast<int>(id), testing_support::star(rng, 80, 60, 20, 40, 8), std::nullopt});
  }
  const AnnotationSet a = augment_dataset(set, dir, dir / "run1", AugmentRanges{}, 42, 1000);
  const AnnotationSet b = augment_dataset(set, dir, dir / "run2", AugmentRanges{}, 42, 1000);
  EXPECT_EQ(annotations_to_json(a), annotations_to_json(b));
  ASSERT_EQ(a.images.size(), 4u);
  for (const auto& im : a.images) {
    EXPECT_GT(im.id, 1000);
    EXPECT_NE(im.file_name.find("_aug42.png"), std::string::npos);
    EXPECT_EQ(file_bytes(dir / "run1" / im.file_name), file_bytes(dir / "run2" / im.file_name));
  }
  const AnnotationSet other = augment_dataset(set, dir, dir / "run3", AugmentRanges{}, 43, 1000);
  EXPECT_NE(annotations_to_json(other), annotations_to_json(a));

  const AnnotationSet resized = resize_dataset(set, dir, dir / "small", 80, 60);
  EXPECT_EQ(read_png(dir / "small" / "img1.png").width(), 80);
  EXPECT_EQ(resized.images[0].width, 80);
  std::filesystem::remove_all(dir);
}
