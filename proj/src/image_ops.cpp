#include "cookar/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cookar/error.hpp"

namespace cookar {

namespace {
std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }
}  // namespace

RgbImage warp_affine(const RgbImage& src, const Affine& transform, int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("warp target must have positive size");
  const Affine inv = transform.inverse();
  const int sw = src.width(), sh = src.height();
  RgbImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Point s = inv.apply({x + 0.5, y + 0.5});
      if (!(s.x >= 0.0 && s.y >= 0.0 && s.x <= sw && s.y <= sh)) continue;
      const double fx = s.x - 0.5, fy = s.y - 0.5;
      const double x0f = std::floor(fx), y0f = std::floor(fy);
      const double tx = fx - x0f, ty = fy - y0f;
      const int x0 = std::clamp(static_cast<int>(x0f), 0, sw - 1), x1 = std::clamp(static_cast<int>(x0f) + 1, 0, sw - 1);
      const int y0 = std::clamp(static_cast<int>(y0f), 0, sh - 1), y1 = std::clamp(static_cast<int>(y0f) + 1, 0, sh - 1);
      const Rgb p00 = src.at(x0, y0), p10 = src.at(x1, y0), p01 = src.at(x0, y1), p11 = src.at(x1, y1);
      auto mix = [&](std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        const double top = a + (b - a) * tx;
        const double bottom = c + (d - c) * tx;
        return to_byte(top + (bottom - top) * ty);
      };
      out.set(x, y, {mix(p00.r, p10.r, p01.r, p11.r), mix(p00.g, p10.g, p01.g, p11.g), mix(p00.b, p10.b, p01.b, p11.b)});
    }
  }
  return out;
}

RgbImage resize_bilinear(const RgbImage& src, int width, int height) {
  if (src.empty()) throw InvalidArgument("cannot resize an empty image");
  return warp_affine(src, Affine::scale(static_cast<double>(width) / src.width(),
                                        static_cast<double>(height) / src.height()),
                     width, height);
}

RgbImage adjust_brightness(const RgbImage& src, double amount) {
  RgbImage out = src;
  for (auto& v : out.data()) v = to_byte(v * (1.0 + amount));
  return out;
}

RgbImage gaussian_blur(const RgbImage& src, double sigma) {
  if (!(sigma > 0.0) || src.empty()) return src;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  for (auto& k : kernel) k /= total;

  const int w = src.width(), h = src.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
  const auto& in = src.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sx = std::clamp(x + i, 0, w - 1);
          acc += kernel[i + radius] * in[(static_cast<std::size_t>(y) * w + sx) * 3 + c];
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
      }
  RgbImage out(w, h);
  auto& dst = out.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sy = std::clamp(y + i, 0, h - 1);
          acc += kernel[i + radius] * tmp[(static_cast<std::size_t>(sy) * w + x) * 3 + c];
        }
        dst[(static_cast<std::size_t>(y) * w + x) * 3 + c] = to_byte(acc);
      }
  return out;
}

void salt_and_pepper(RgbImage& image, double fraction, SplitMix64& rng) {
  if (!(fraction > 0.0) || image.empty()) return;
  const std::uint64_t pixels = static_cast<std::uint64_t>(image.width()) * image.height();
  const auto count = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(pixels)));
  auto& data = image.data();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t p = rng.below(pixels);
    for (int c = 0; c < 3; ++c) data[p * 3 + c] = (rng.next() & 1) ? 255 : 0;
  }
}

}  // namespace cookar
