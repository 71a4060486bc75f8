#pragma once

#include <optional>
#include <span>

#include "cookar/style.hpp"
#include "cookar/types.hpp"

namespace cookar {

inline constexpr double kMaxDepthMm = 65535.0;

/// round(focal_px * baseline_m * 1000 / depth_mm). Depth above 65535 mm is
/// capped. Throws InvalidArgument for non-positive depth.
int disparity_px(double depth_mm, double focal_px, double baseline_m);

/// Median of the non-zero depth samples under `mask` (lower median for even
/// counts); nullopt when none are valid.
std::optional<std::uint16_t> median_depth(const Bitmask& mask, const DepthMap& depth);

/// out = round((1 - alpha) * dst + alpha * color), per channel.
Rgb blend(Rgb dst, Rgb color, double alpha) noexcept;

/// Draws each instance with its role's style. With depth, instances are drawn
/// far to near by median depth; equal depth (or no depth) draws lower class
/// ids first. Pixels outside the styled regions are never touched.
RgbImage composite(const RgbImage& image, std::span<const AffordanceInstance> instances, const StyleSpec& style,
                   const DepthMap* depth_mm = nullptr);

/// Right-eye overlays: every instance is shifted left by the disparity of its
/// median depth (measured in the left view), then drawn like composite().
/// Instances without valid depth use the 65535 mm cap.
RgbImage composite_right(const RgbImage& right_image, std::span<const AffordanceInstance> instances,
                         const StyleSpec& style, const DepthMap& depth_mm, double focal_px, double baseline_m);

}  // namespace cookar
