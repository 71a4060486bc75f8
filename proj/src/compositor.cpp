#include "cookar/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cookar/error.hpp"
#include "cookar/geometry.hpp"

namespace cookar {

namespace {

struct Layer {
  std::size_t index = 0;
  std::uint16_t depth = 0;
  Bitmask mask;
};

// Left-view masks in drawing order.
std::vector<Layer> order_layers(std::span<const AffordanceInstance> instances, int w, int h, const DepthMap* depth) {
  if (depth && (depth->width() != w || depth->height() != h)) {
    throw InvalidArgument("depth map dimensions differ from the image");
  }
  std::vector<Layer> layers;
  layers.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    Layer l{i, static_cast<std::uint16_t>(kMaxDepthMm), rasterize(instances[i].shape, w, h)};
    if (depth) l.depth = median_depth(l.mask, *depth).value_or(static_cast<std::uint16_t>(kMaxDepthMm));
    layers.push_back(std::move(l));
  }
  std::stable_sort(layers.begin(), layers.end(), [&](const Layer& a, const Layer& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    return instances[a.index].class_id < instances[b.index].class_id;
  });
  return layers;
}

void draw(RgbImage& out, const Bitmask& mask, const RoleStyle& rs) {
  if (rs.mode == OverlayMode::off) return;
  const Bitmask region = rs.mode == OverlayMode::outline ? boundary(mask, rs.thickness) : mask;
  const auto box = mask_bounds(region);
  if (!box) return;
  for (int y = box->y0; y < box->y1; ++y) {
    for (int x = box->x0; x < box->x1; ++x) {
      if (region.at(x, y)) out.set(x, y, blend(out.at(x, y), rs.color, rs.alpha));
    }
  }
}

}  // namespace

int disparity_px(double depth_mm, double focal_px, double baseline_m) {
  if (!(depth_mm > 0.0)) throw InvalidArgument("disparity: depth must be positive");
  const double d = std::min(depth_mm, kMaxDepthMm);
  return static_cast<int>(std::lround(focal_px * baseline_m * 1000.0 / d));
}

std::optional<std::uint16_t> median_depth(const Bitmask& mask, const DepthMap& depth) {
  if (mask.width() != depth.width() || mask.height() != depth.height()) throw InvalidArgument("depth map size differs from mask");
  std::vector<std::uint16_t> samples;
  const auto box = mask_bounds(mask);
  if (!box) return std::nullopt;
  for (int y = box->y0; y < box->y1; ++y) {
    for (int x = box->x0; x < box->x1; ++x) {
      if (mask.at(x, y) && depth.at(x, y) != 0) samples.push_back(depth.at(x, y));
    }
  }
  if (samples.empty()) return std::nullopt;
  const auto mid = samples.begin() + static_cast<std::ptrdiff_t>((samples.size() - 1) / 2);
  std::nth_element(samples.begin(), mid, samples.end());
  return *mid;
}

Rgb blend(Rgb dst, Rgb color, double alpha) noexcept {
  auto ch = [alpha](std::uint8_t d, std::uint8_t c) {
    const double v = std::round((1.0 - alpha) * d + alpha * c);
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  };
  return {ch(dst.r, color.r), ch(dst.g, color.g), ch(dst.b, color.b)};
}

RgbImage composite(const RgbImage& image, std::span<const AffordanceInstance> instances, const StyleSpec& style,
                   const DepthMap* depth_mm) {
  RgbImage out = image;
  if (instances.empty() || image.empty()) return out;
  for (const Layer& l : order_layers(instances, image.width(), image.height(), depth_mm)) {
    draw(out, l.mask, style[instances[l.index].role]);
  }
  return out;
}

RgbImage composite_right(const RgbImage& right_image, std::span<const AffordanceInstance> instances,
                         const StyleSpec& style, const DepthMap& depth_mm, double focal_px, double baseline_m) {
  RgbImage out = right_image;
  if (instances.empty() || right_image.empty()) return out;
  const int w = right_image.width();
  const int h = right_image.height();
  for (const Layer& l : order_layers(instances, w, h, &depth_mm)) {
    const AffordanceInstance& inst = instances[l.index];
    const int shift = disparity_px(l.depth, focal_px, baseline_m);
    auto moved = transform_polygon(inst.shape, Affine::translation(-shift, 0), w, h);
    if (!moved) continue;
    draw(out, rasterize(*moved, w, h), style[inst.role]);
  }
  return out;
}

}  // namespace cookar
