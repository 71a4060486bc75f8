#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace cookar {

/// Affordance role. The integer value is the wire encoding.
enum class Role : std::uint8_t {
  grabbable = 0,
  hazardous = 1,
  entry = 2,
  exit = 3,
  containment = 4,
  intersection = 5,
  activation = 6,
};

inline constexpr std::size_t kRoleCount = 7;

std::string_view role_name(Role role) noexcept;
std::optional<Role> role_from_name(std::string_view name) noexcept;
std::optional<Role> role_from_wire(std::uint8_t value) noexcept;

enum class Eye : std::uint8_t { left = 0, right = 1, mono = 2 };

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Ring = std::vector<Point>;

/// Polygon with holes: rings[0] is the exterior, the rest are holes. Fill
/// uses the even-odd rule, so ring orientation does not matter.
struct Polygon {
  std::vector<Ring> rings;
  bool empty() const noexcept { return rings.empty(); }
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

/// Sentinel class id for detections outside the taxonomy (0xFF on the wire).
inline constexpr int kUnknownClass = 0xFF;

struct AffordanceInstance {
  int class_id = kUnknownClass;
  Role role = Role::hazardous;
  double confidence = 1.0;
  Polygon shape;
  friend bool operator==(const AffordanceInstance&, const AffordanceInstance&) = default;
};

/// Row-major pixel membership. One byte per pixel (0 or 1).
class Bitmask {
 public:
  Bitmask() = default;
  Bitmask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const noexcept { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) noexcept { bits_[index(x, y)] = value ? 1 : 0; }
  std::size_t count() const noexcept;
  bool same_size(const Bitmask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::vector<std::uint8_t>& bits() noexcept { return bits_; }

  friend bool operator==(const Bitmask&, const Bitmask&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// RGB8, row-major, 3 bytes per pixel.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {});
  RgbImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  Rgb at(int x, int y) const noexcept {
    const auto i = offset(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    const auto i = offset(x, y);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }
  std::vector<std::uint8_t>& data() noexcept { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Per-pixel depth in millimetres; 0 means no measurement.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, std::uint16_t fill = 0);
  DepthMap(int width, int height, std::vector<std::uint16_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint16_t at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }
  void set(int x, int y, std::uint16_t v) noexcept {
    data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)] = v;
  }
  const std::vector<std::uint16_t>& data() const noexcept { return data_; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint16_t> data_;
};

/// One captured frame. Depth stays on the client; it is never put on the wire.
struct FrameEnvelope {
  std::uint64_t frame_id = 0;
  std::uint64_t timestamp_us = 0;
  Eye eye = Eye::left;
  RgbImage image;
  std::optional<DepthMap> depth_mm;
};

}  // namespace cookar
