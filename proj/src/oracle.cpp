#include "cookar/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cookar/compositor.hpp"
#include "cookar/error.hpp"
#include "cookar/geometry.hpp"
#include "cookar/rng.hpp"
#include "cookar/taxonomy.hpp"

namespace cookar {

namespace {

constexpr int kToolKinds = 9;  // knife, spoon, fork, scissors, ladle, spatula, pan, cup, carafe
constexpr int kMaxPlacementAttempts = 100;
constexpr double kMinVisibleArea = 16.0;

Ring rect(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

Ring ellipse(double cx, double cy, double rx, double ry, int n = 24) {
  Ring r;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    r.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return r;
}

// Tool outline in units of the tool length, pointing along +x. Returns
// {functional part, handle}.
std::array<Polygon, 2> tool_parts(int kind) {
  switch (kind) {
    case 0:  // knife
      return {Polygon{{{{-0.1, -0.08}, {0.5, 0.0}, {-0.1, 0.06}}}}, Polygon{{rect(-0.5, -0.05, -0.1, 0.05)}}};
    case 1:  // spoon
      return {Polygon{{ellipse(0.2, 0.0, 0.15, 0.09)}}, Polygon{{rect(-0.5, -0.03, 0.05, 0.03)}}};
    case 2:  // fork: three tines on a bar
      return {Polygon{{{{0.0, -0.08}, {0.4, -0.08}, {0.4, -0.05}, {0.14, -0.05}, {0.14, -0.02}, {0.4, -0.02},
                        {0.4, 0.02}, {0.14, 0.02}, {0.14, 0.05}, {0.4, 0.05}, {0.4, 0.08}, {0.0, 0.08}}}},
              Polygon{{rect(-0.5, -0.035, 0.0, 0.035)}}};
    case 3:  // scissors: finger loop with a hole
      return {Polygon{{{{0.0, -0.05}, {0.5, 0.0}, {0.0, 0.05}}}},
              Polygon{{ellipse(-0.2, 0.0, 0.14, 0.14), ellipse(-0.2, 0.0, 0.08, 0.08)}}};
    case 4:  // ladle
      return {Polygon{{ellipse(0.25, 0.0, 0.15, 0.15)}}, Polygon{{rect(-0.5, -0.025, 0.1, 0.025)}}};
    case 5:  // spatula
      return {Polygon{{rect(0.0, -0.12, 0.35, 0.12)}}, Polygon{{rect(-0.5, -0.03, 0.0, 0.03)}}};
    case 6:  // pan
      return {Polygon{{ellipse(0.15, 0.0, 0.3, 0.3, 32)}}, Polygon{{rect(-0.55, -0.04, -0.15, 0.04)}}};
    case 7:  // cup: ring handle beside the base
      return {Polygon{{rect(-0.15, -0.2, 0.15, 0.2)}},
              Polygon{{ellipse(0.25, 0.0, 0.1, 0.1), ellipse(0.25, 0.0, 0.05, 0.05)}}};
    default:  // carafe: rectangular loop handle
      return {Polygon{{rect(-0.15, -0.3, 0.15, 0.3)}},
              Polygon{{rect(0.15, -0.2, 0.32, 0.2), rect(0.2, -0.14, 0.27, 0.14)}}};
  }
}

constexpr std::array<Rgb, kToolKinds> kFunctionalColors = {{
    {186, 189, 196}, {178, 180, 186}, {192, 194, 200}, {170, 172, 180}, {160, 164, 170},
    {70, 72, 78},    {58, 58, 64},    {214, 204, 188}, {150, 170, 185},
}};
constexpr std::array<Rgb, kToolKinds> kHandleColors = {{
    {96, 62, 38}, {40, 40, 44}, {120, 84, 52}, {30, 60, 110}, {44, 44, 48},
    {140, 96, 60}, {36, 36, 40}, {200, 190, 172}, {28, 28, 32},
}};

struct PlacedTool {
  int kind = 0;
  std::array<Polygon, 2> parts;  // canvas coordinates, integer vertices
  std::uint16_t depth_mm = kBackgroundDepthMm;
};

Polygon round_vertices(const Polygon& p) {
  Polygon out;
  for (const Ring& ring : p.rings) {
    Ring r;
    for (const Point& v : ring) {
      const Point q{std::round(v.x), std::round(v.y)};
      if (r.empty() || !(r.back() == q)) r.push_back(q);
    }
    while (r.size() > 1 && r.front() == r.back()) r.pop_back();
    if (r.size() >= 3) out.rings.push_back(std::move(r));
    else if (out.rings.empty()) return {};
  }
  return out;
}

std::optional<Polygon> place(const Polygon& local, const Affine& pose, int w, int h) {
  auto clipped = transform_polygon(local, pose, w, h);
  if (!clipped) return std::nullopt;
  Polygon rounded = round_vertices(*clipped);
  if (rounded.empty() || polygon_area(rounded) < kMinVisibleArea) return std::nullopt;
  return rounded;
}

std::vector<PlacedTool> layout(const SceneSpec& spec) {
  spec.validate();
  SplitMix64 rng(mix_seed(spec.seed, 0x1A70));
  const double base = 0.45 * std::min(spec.width, spec.height);
  std::vector<PlacedTool> tools;
  for (int t = 0; t < spec.tool_count; ++t) {
    const int kind = static_cast<int>(rng.below(kToolKinds));
    const auto local = tool_parts(kind);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const double length = base * rng.uniform(0.7, 1.1);
      const double angle = rng.uniform(0.0, 360.0);
      const double cx = rng.uniform(0.0, spec.width);
      const double cy = rng.uniform(0.0, spec.height);
      const std::uint16_t depth = spec.fixed_depth_mm ? *spec.fixed_depth_mm
                                                      : static_cast<std::uint16_t>(rng.between(500, 2500));
      const Affine pose = Affine::translation(cx, cy).after(Affine::rotation_about(angle, 0, 0))
                              .after(Affine::scale(length, length));
      auto functional = place(local[0], pose, spec.width, spec.height);
      auto handle = place(local[1], pose, spec.width, spec.height);
      if (functional && handle) {
        tools.push_back({kind, {std::move(*functional), std::move(*handle)}, depth});
        placed = true;
      }
    }
    if (!placed) {
      throw Error("could not place tool " + std::to_string(t) + " inside a " + std::to_string(spec.width) + "x" +
                  std::to_string(spec.height) + " canvas after 100 attempts");
    }
  }
  return tools;
}

std::vector<AffordanceInstance> instances_of(const std::vector<PlacedTool>& tools) {
  std::vector<AffordanceInstance> out;
  for (const PlacedTool& tool : tools) {
    for (int part = 0; part < 2; ++part) {
      const int class_id = 2 * tool.kind + part;
      out.push_back({class_id, role_of(class_id), 1.0, tool.parts[static_cast<std::size_t>(part)]});
    }
  }
  return out;
}

struct Background {
  std::uint64_t seed;
  Rgb base;

  Rgb at(long long x, long long y, int height) const {
    const long long tx = x >= 0 ? x / 40 : (x - 39) / 40;
    const long long ty = y / 40;
    SplitMix64 g(mix_seed(seed, static_cast<std::uint64_t>(tx) * 0x9E37ULL + static_cast<std::uint64_t>(ty)));
    const int tile = static_cast<int>(g.between(-18, 18));
    const int grad = static_cast<int>(20.0 * static_cast<double>(y) / std::max(height, 1));
    auto ch = [&](int v) { return static_cast<std::uint8_t>(std::clamp(v + tile + grad, 30, 215)); };
    return {ch(base.r), ch(base.g), ch(base.b)};
  }
};

void fill(RgbImage& img, const Bitmask& mask, Rgb color) {
  const auto box = mask_bounds(mask);
  if (!box) return;
  for (int y = box->y0; y < box->y1; ++y) {
    for (int x = box->x0; x < box->x1; ++x) {
      if (mask.at(x, y)) img.set(x, y, color);
    }
  }
}

}  // namespace

void SceneSpec::validate() const {
  if (tool_count < 1 || tool_count > 6) throw InvalidArgument("tool_count must be in [1,6]");
  if (width <= 0 || height <= 0 || width > 0xFFFF || height > 0xFFFF) {
    throw InvalidArgument("scene canvas must be between 1 and 65535 pixels per side");
  }
  if (!(jitter.translate_px >= 0.0)) throw InvalidArgument("translate_px must be >= 0");
  if (!(jitter.confidence_floor >= 0.0 && jitter.confidence_floor <= 1.0)) {
    throw InvalidArgument("confidence_floor must be in [0,1]");
  }
  if (!(rig.focal_px > 0.0 && rig.baseline_m > 0.0)) throw InvalidArgument("stereo rig parameters must be positive");
  if (fixed_depth_mm && *fixed_depth_mm == 0) throw InvalidArgument("fixed depth must be positive");
}

SceneSpec SceneSpec::for_frame(std::uint64_t frame_id) const {
  SceneSpec s = *this;
  s.seed = mix_seed(seed, frame_id + 1);
  return s;
}

std::vector<AffordanceInstance> scene_ground_truth(const SceneSpec& spec) { return instances_of(layout(spec)); }

Scene oracle_scene(const SceneSpec& spec) {
  std::vector<PlacedTool> tools = layout(spec);
  const int w = spec.width;
  const int h = spec.height;

  SplitMix64 rng(mix_seed(spec.seed, 0xBAC6));
  const int warm = static_cast<int>(rng.between(95, 150));
  const Background bg{rng.next(), {static_cast<std::uint8_t>(warm + 12), static_cast<std::uint8_t>(warm + 4),
                                   static_cast<std::uint8_t>(warm - 6)}};
  const std::uint16_t bg_depth = spec.fixed_depth_mm ? *spec.fixed_depth_mm : kBackgroundDepthMm;
  const int bg_shift = disparity_px(bg_depth, spec.rig.focal_px, spec.rig.baseline_m);

  Scene scene;
  scene.left = RgbImage(w, h);
  scene.right = RgbImage(w, h);
  scene.depth_mm = DepthMap(w, h, bg_depth);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      scene.left.set(x, y, bg.at(x, y, h));
      scene.right.set(x, y, bg.at(static_cast<long long>(x) + bg_shift, y, h));
    }
  }

  // Far to near so nearer tools occlude.
  std::vector<std::size_t> order(tools.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tools[a].depth_mm > tools[b].depth_mm; });
  for (std::size_t i : order) {
    const PlacedTool& tool = tools[i];
    const int shift = disparity_px(tool.depth_mm, spec.rig.focal_px, spec.rig.baseline_m);
    for (int part = 0; part < 2; ++part) {
      const Polygon& shape = tool.parts[static_cast<std::size_t>(part)];
      const Rgb color = part == 0 ? kFunctionalColors[static_cast<std::size_t>(tool.kind)]
                                  : kHandleColors[static_cast<std::size_t>(tool.kind)];
      const Bitmask mask = rasterize(shape, w, h);
      fill(scene.left, mask, color);
      if (const auto box = mask_bounds(mask)) {
        for (int y = box->y0; y < box->y1; ++y) {
          for (int x = box->x0; x < box->x1; ++x) {
            if (mask.at(x, y)) scene.depth_mm.set(x, y, tool.depth_mm);
          }
        }
      }
      fill(scene.right, rasterize(translate_polygon(shape, -shift, 0), w, h), color);
    }
  }
  scene.ground_truth = instances_of(tools);
  return scene;
}

std::vector<AffordanceInstance> oracle_segment(std::uint64_t frame_id, const SceneSpec& spec) {
  const SceneSpec frame_spec = spec.for_frame(frame_id);
  std::vector<AffordanceInstance> out = scene_ground_truth(frame_spec);
  SplitMix64 rng(mix_seed(spec.seed ^ 0x5EEDULL, frame_id));
  const auto reach = static_cast<long long>(std::floor(spec.jitter.translate_px));
  const double floor = spec.jitter.confidence_floor;
  for (AffordanceInstance& inst : out) {
    if (reach > 0) {
      long long dx = 0;
      long long dy = 0;
      do {
        dx = rng.between(-reach, reach);
        dy = rng.between(-reach, reach);
      } while (dx * dx + dy * dy > reach * reach);
      auto moved = transform_polygon(inst.shape, Affine::translation(static_cast<double>(dx), static_cast<double>(dy)),
                                     spec.width, spec.height);
      if (moved) {
        Polygon rounded = round_vertices(*moved);
        if (!rounded.empty()) inst.shape = std::move(rounded);
      }
    }
    const double conf = floor + rng.uniform() * (1.0 - floor);
    inst.confidence = std::clamp(std::round(conf * 10000.0) / 10000.0, 0.0, 1.0);
  }
  return out;
}

OracleBackend::OracleBackend(SceneSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

}  // namespace cookar
