#include "cookar/geometry.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "cookar/error.hpp"

namespace cookar {

namespace {

void check_rings(const Polygon& shape) {
  for (std::size_t i = 0; i < shape.rings.size(); ++i) {
    const Ring& ring = shape.rings[i];
    if (ring.size() < 3) {
      throw GeometryError("ring " + std::to_string(i) + " has " + std::to_string(ring.size()) +
                          " vertices; at least 3 are required");
    }
    for (const Point& p : ring) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw GeometryError("non-finite vertex coordinate");
    }
  }
}

enum class Side { left, right, top, bottom };

bool inside(Point p, Side side, double limit) {
  switch (side) {
    case Side::left: return p.x >= 0.0;
    case Side::right: return p.x <= limit;
    case Side::top: return p.y >= 0.0;
    case Side::bottom: return p.y <= limit;
  }
  return false;
}

Point intersect(Point s, Point e, Side side, double limit) {
  const double boundary = (side == Side::left || side == Side::top) ? 0.0 : limit;
  if (side == Side::left || side == Side::right) {
    const double t = (boundary - s.x) / (e.x - s.x);
    return {boundary, s.y + t * (e.y - s.y)};
  }
  const double t = (boundary - s.y) / (e.y - s.y);
  return {s.x + t * (e.x - s.x), boundary};
}

Ring clip_ring(const Ring& ring, double width, double height) {
  Ring out = ring;
  const std::pair<Side, double> sides[] = {
      {Side::left, 0.0}, {Side::right, width}, {Side::top, 0.0}, {Side::bottom, height}};
  for (const auto& [side, limit] : sides) {
    if (out.empty()) break;
    Ring in = std::move(out);
    out.clear();
    Point s = in.back();
    for (const Point& e : in) {
      const bool e_in = inside(e, side, limit);
      const bool s_in = inside(s, side, limit);
      if (e_in) {
        if (!s_in) out.push_back(intersect(s, e, side, limit));
        out.push_back(e);
      } else if (s_in) {
        out.push_back(intersect(s, e, side, limit));
      }
      s = e;
    }
  }
  // Collapse repeated vertices introduced by clipping along an edge.
  Ring dedup;
  for (const Point& p : out) {
    if (dedup.empty() || !(dedup.back() == p)) dedup.push_back(p);
  }
  while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
  return dedup;
}

double ring_area(const Ring& ring) {
  double twice = 0.0;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    twice += ring[j].x * ring[i].y - ring[i].x * ring[j].y;
  }
  return std::abs(twice) * 0.5;
}

}  // namespace

Affine Affine::rotation_about(double degrees, double cx, double cy) noexcept {
  double cs = 0.0;
  double sn = 0.0;
  const double quarter = degrees / 90.0;
  if (quarter == std::round(quarter)) {
    // Exact for multiples of 90 degrees.
    static constexpr double kCos[] = {1, 0, -1, 0};
    static constexpr double kSin[] = {0, 1, 0, -1};
    const auto k = static_cast<std::size_t>(((static_cast<long long>(quarter) % 4) + 4) % 4);
    cs = kCos[k];
    sn = kSin[k];
  } else {
    const double rad = degrees * std::numbers::pi / 180.0;
    cs = std::cos(rad);
    sn = std::sin(rad);
  }
  return {cs, -sn, cx - cs * cx + sn * cy, sn, cs, cy - sn * cx - cs * cy};
}

Affine Affine::inverse() const {
  const double det = determinant();
  if (det == 0.0 || !std::isfinite(det)) throw GeometryError("affine transform is not invertible");
  const double ia = e / det;
  const double ib = -b / det;
  const double id = -d / det;
  const double ie = a / det;
  return {ia, ib, -(ia * c + ib * f), id, ie, -(id * c + ie * f)};
}

Affine Affine::after(const Affine& first) const noexcept {
  return {a * first.a + b * first.d, a * first.b + b * first.e, a * first.c + b * first.f + c,
          d * first.a + e * first.d, d * first.b + e * first.e, d * first.c + e * first.f + f};
}

void validate_polygon(const Polygon& shape) {
  if (shape.rings.empty()) throw GeometryError("polygon has no rings");
  check_rings(shape);
  for (const Ring& ring : shape.rings) {
    for (const Point& p : ring) {
      if (p.x < 0.0 || p.y < 0.0) throw GeometryError("negative vertex coordinate");
    }
  }
}

Bitmask rasterize(const Polygon& shape, int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("rasterize: width and height must be positive");
  check_rings(shape);
  Bitmask mask(width, height);
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const Ring& ring : shape.rings)
    for (const Point& p : ring) {
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  const int row0 = static_cast<int>(std::clamp(std::floor(ymin), 0.0, static_cast<double>(height)));
  const int row1 = static_cast<int>(std::clamp(std::ceil(ymax) + 1.0, 0.0, static_cast<double>(height)));
  std::vector<double> xs;
  for (int y = row0; y < row1; ++y) {
    const double cy = y + 0.5;
    xs.clear();
    for (const Ring& ring : shape.rings) {
      for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        // Half-open in y so a vertex on the scanline is counted once. Same
        // expression as the classic crossing test, so centres lying exactly
        // on an edge resolve identically.
        if ((a.y > cy) != (b.y > cy)) {
          xs.push_back((b.x - a.x) * (cy - a.y) / (b.y - a.y) + a.x);
        }
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel centres cx with xs[k] <= cx < xs[k+1].
      const double lo = xs[k];
      const double hi = xs[k + 1];
      double first = std::ceil(lo - 0.5);
      if (first + 0.5 < lo) first += 1.0;
      double last = std::ceil(hi - 0.5) - 1.0;
      if (last + 0.5 >= hi) last -= 1.0;
      if (last + 1.0 + 0.5 < hi) last += 1.0;
      first = std::max(first, 0.0);
      last = std::min(last, static_cast<double>(width - 1));
      for (auto x = static_cast<long long>(first); x <= static_cast<long long>(last); ++x) {
        mask.set(static_cast<int>(x), y);
      }
    }
  }
  return mask;
}

Overlap mask_overlap(const Bitmask& a, const Bitmask& b) {
  if (!a.same_size(b)) throw InvalidArgument("mask_iou: mask dimensions differ");
  Overlap o;
  const auto& ab = a.bits();
  const auto& bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    o.intersection += static_cast<std::size_t>(ab[i] & bb[i]);
    o.union_ += static_cast<std::size_t>(ab[i] | bb[i]);
  }
  return o;
}

double mask_iou(const Bitmask& a, const Bitmask& b) {
  const Overlap o = mask_overlap(a, b);
  if (o.union_ == 0) return 0.0;
  return static_cast<double>(o.intersection) / static_cast<double>(o.union_);
}

std::optional<PixelBox> mask_bounds(const Bitmask& mask) {
  const int w = mask.width();
  const auto& bits = mask.bits();
  std::optional<PixelBox> box;
  for (int y = 0; y < mask.height(); ++y) {
    const auto* row = bits.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
    // Set pixels hold exactly 1.
    const void* hit = std::memchr(row, 1, static_cast<std::size_t>(w));
    if (!hit) continue;
    const int first = static_cast<int>(static_cast<const std::uint8_t*>(hit) - row);
    const int last = static_cast<int>(static_cast<const std::uint8_t*>(memrchr(row, 1, static_cast<std::size_t>(w))) - row);
    if (!box) {
      box = PixelBox{first, y, last + 1, y + 1};
    } else {
      box->x0 = std::min(box->x0, first);
      box->x1 = std::max(box->x1, last + 1);
      box->y1 = y + 1;
    }
  }
  return box;
}

Bitmask boundary(const Bitmask& mask, int thickness) {
  if (thickness < 1) throw InvalidArgument("boundary: thickness must be >= 1");
  const int w = mask.width();
  const int h = mask.height();
  Bitmask edge(w, h);
  // Every result pixel is a mask pixel, and a shortest 4-connected path
  // between two mask pixels stays inside their bounding box.
  const auto box = mask_bounds(mask);
  if (!box) return edge;
  auto unset = [&](int x, int y) { return x < 0 || y < 0 || x >= w || y >= h || !mask.at(x, y); };

  for (int y = box->y0; y < box->y1; ++y) {
    for (int x = box->x0; x < box->x1; ++x) {
      if (mask.at(x, y) && (unset(x - 1, y) || unset(x + 1, y) || unset(x, y - 1) || unset(x, y + 1))) {
        edge.set(x, y);
      }
    }
  }
  for (int step = 1; step < thickness; ++step) {
    Bitmask grown = edge;
    bool changed = false;
    for (int y = box->y0; y < box->y1; ++y) {
      for (int x = box->x0; x < box->x1; ++x) {
        if (edge.at(x, y)) continue;
        if ((x > box->x0 && edge.at(x - 1, y)) || (x + 1 < box->x1 && edge.at(x + 1, y)) ||
            (y > box->y0 && edge.at(x, y - 1)) || (y + 1 < box->y1 && edge.at(x, y + 1))) {
          grown.set(x, y);
          changed = true;
        }
      }
    }
    edge = std::move(grown);
    if (!changed) break;
  }
  auto& bits = edge.bits();
  const auto& m = mask.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] &= m[i];
  return edge;
}

std::optional<Polygon> transform_polygon(const Polygon& shape, const Affine& transform, int width, int height) {
  check_rings(shape);
  (void)transform.inverse();
  Polygon out;
  for (std::size_t i = 0; i < shape.rings.size(); ++i) {
    Ring mapped;
    mapped.reserve(shape.rings[i].size());
    for (const Point& p : shape.rings[i]) mapped.push_back(transform.apply(p));
    Ring clipped = clip_ring(mapped, width, height);
    if (clipped.size() < 3) {
      if (i == 0) return std::nullopt;
      continue;
    }
    out.rings.push_back(std::move(clipped));
  }
  if (out.rings.empty()) return std::nullopt;
  return out;
}

double polygon_area(const Polygon& shape) {
  if (shape.rings.empty()) return 0.0;
  double area = ring_area(shape.rings.front());
  for (std::size_t i = 1; i < shape.rings.size(); ++i) area -= ring_area(shape.rings[i]);
  return std::max(area, 0.0);
}

Polygon translate_polygon(const Polygon& shape, double dx, double dy) {
  Polygon out = shape;
  for (Ring& ring : out.rings) {
    for (Point& p : ring) {
      p.x += dx;
      p.y += dy;
    }
  }
  return out;
}

}  // namespace cookar
