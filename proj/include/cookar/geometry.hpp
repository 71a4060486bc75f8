#pragma once

#include <optional>

#include "cookar/types.hpp"

namespace cookar {

/// 2x3 affine map: x' = a*x + b*y + c, y' = d*x + e*y + f.
struct Affine {
  double a = 1, b = 0, c = 0;
  double d = 0, e = 1, f = 0;

  static Affine identity() noexcept { return {}; }
  static Affine translation(double dx, double dy) noexcept { return {1, 0, dx, 0, 1, dy}; }
  static Affine scale(double sx, double sy) noexcept { return {sx, 0, 0, 0, sy, 0}; }
  /// Rotation by `degrees` about (cx, cy) in image coordinates (y down);
  /// +90 maps (10,10) to (90,10) in a 100x100 frame.
  static Affine rotation_about(double degrees, double cx, double cy) noexcept;

  Point apply(Point p) const noexcept { return {a * p.x + b * p.y + c, d * p.x + e * p.y + f}; }
  double determinant() const noexcept { return a * e - b * d; }
  /// Throws GeometryError if singular.
  Affine inverse() const;
  /// (*this) after `first`: result.apply(p) == apply(first.apply(p)).
  Affine after(const Affine& first) const noexcept;

  friend bool operator==(const Affine&, const Affine&) = default;
};

/// Ring validity: >= 3 vertices, finite coordinates >= 0.
void validate_polygon(const Polygon& shape);

/// Pixel (x, y) is set iff its centre (x+0.5, y+0.5) is inside under the
/// even-odd rule. Throws GeometryError on a ring with fewer than 3 vertices
/// and InvalidArgument on non-positive dimensions.
Bitmask rasterize(const Polygon& shape, int width, int height);

/// |a and b| / |a or b|, 0 when both are empty. Throws InvalidArgument on size mismatch.
double mask_iou(const Bitmask& a, const Bitmask& b);

struct Overlap {
  std::size_t intersection = 0;
  std::size_t union_ = 0;
};
Overlap mask_overlap(const Bitmask& a, const Bitmask& b);

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
/// Tightest box around the set pixels; nullopt for an empty mask.
std::optional<PixelBox> mask_bounds(const Bitmask& mask);

/// Mask pixels within 4-connected distance (thickness-1) of a pixel that has
/// an unset 4-neighbour (the frame edge counts as unset).
Bitmask boundary(const Bitmask& mask, int thickness);

/// Maps every vertex and clips each ring to [0,width]x[0,height]
/// (Sutherland-Hodgman). Rings left with fewer than 3 vertices are dropped;
/// nullopt when nothing survives. Throws GeometryError for a singular transform.
std::optional<Polygon> transform_polygon(const Polygon& shape, const Affine& transform, int width, int height);

/// Shoelace area of the exterior minus the holes.
double polygon_area(const Polygon& shape);

Polygon translate_polygon(const Polygon& shape, double dx, double dy);

}  // namespace cookar
