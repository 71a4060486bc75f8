#pragma once

#include "cookar/geometry.hpp"
#include "cookar/rng.hpp"
#include "cookar/types.hpp"

namespace cookar {

/// Output pixel (x, y) takes the bilinear sample of `src` at
/// transform^-1(x + 0.5, y + 0.5). Samples that map outside the source
/// rectangle are black; inside it, neighbours are clamped to the edge.
RgbImage warp_affine(const RgbImage& src, const Affine& transform, int width, int height);

/// Bilinear stretch to width x height.
RgbImage resize_bilinear(const RgbImage& src, int width, int height);

/// v' = clamp(round(v * (1 + amount)), 0, 255) per channel.
RgbImage adjust_brightness(const RgbImage& src, double amount);

/// Separable Gaussian, kernel truncated at ceil(3 sigma), edge-clamped.
/// sigma <= 0 returns a copy.
RgbImage gaussian_blur(const RgbImage& src, double sigma);

/// Replaces round(fraction * pixels) randomly drawn pixel positions; each
/// channel independently becomes 0 or 255. Draws: position, then one bit per
/// channel.
void salt_and_pepper(RgbImage& image, double fraction, SplitMix64& rng);

}  // namespace cookar
